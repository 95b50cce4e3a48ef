import type { EditCommand, PageInfo, Segmentation, Stats } from "./model.js";

/** Error carrying the server's status and diagnostic, plus the invariant
 * violation list on a 422 when the server provides one. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
    readonly violations: string[] = [],
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function toError(res: Response): Promise<ApiError> {
  let detail = `${res.status} ${res.statusText}`;
  let violations: string[] = [];
  try {
    const body = await res.json();
    if (typeof body.detail === "string") {
      detail = body.detail;
    } else if (body.detail !== undefined) {
      // pydantic validation errors arrive as a list of objects
      detail = JSON.stringify(body.detail);
    }
    if (Array.isArray(body.violations)) {
      violations = body.violations.map(String);
    }
  } catch {
    // non-JSON body, keep the status line
  }
  return new ApiError(res.status, detail, violations);
}

export class ReviewApi {
  constructor(readonly base: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await fetch(this.base + path, init);
    if (!res.ok) throw await toError(res);
    return res.json() as Promise<T>;
  }

  listPages(): Promise<PageInfo[]> {
    return this.request("/pages");
  }

  segmentation(pageId: string): Promise<Segmentation> {
    return this.request(`/pages/${pageId}/segmentation`);
  }

  imageUrl(pageId: string): string {
    return `${this.base}/pages/${pageId}/image`;
  }

  /** POST an edit batch; resolves to the server's post-edit segmentation,
   * which is the only state the UI renders from. */
  applyEdits(pageId: string, revision: number, commands: EditCommand[]): Promise<Segmentation> {
    return this.request(`/pages/${pageId}/edits`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ revision, commands }),
    });
  }

  approve(pageId: string, revision: number): Promise<PageInfo> {
    return this.request(`/pages/${pageId}/approve`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ revision }),
    });
  }

  stats(): Promise<Stats> {
    return this.request("/stats");
  }
}
