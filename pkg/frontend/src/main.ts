import { ReviewApi } from "./api.js";
import { ReviewApp } from "./app.js";

// Served by the review service under /ui, so API paths are same-origin.
const app = new ReviewApp(new ReviewApi(""));
app.start().catch((err) => {
  const bar = document.getElementById("error-bar");
  if (bar) {
    bar.textContent = `failed to start: ${err}`;
    bar.hidden = false;
  }
});
