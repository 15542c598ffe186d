import { ServiceClient } from "./api.js";
import { ConsoleApp, findElements } from "./app.js";
import { resolveBaseUrl } from "./config.js";

declare global {
  interface Window {
    QUERY_CONSOLE_BASE_URL?: string;
  }
}

const baseUrl = resolveBaseUrl(
  window.location.search,
  window.QUERY_CONSOLE_BASE_URL,
);
const app = new ConsoleApp(
  document,
  findElements(document),
  new ServiceClient(baseUrl),
);
app.start();
