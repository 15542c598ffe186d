/** The console's one piece of configuration: the service base URL.
 *
 * Resolution order: explicit ?service= query parameter, then a
 * window-level override (set by whoever serves the page), then the
 * conventional local default.
 */

export const DEFAULT_BASE_URL = "http://localhost:8000";

export function resolveBaseUrl(
  search: string,
  override?: string | undefined,
): string {
  const fromQuery = new URLSearchParams(search).get("service");
  const chosen = fromQuery || override || DEFAULT_BASE_URL;
  // Trailing slashes would produce "//v1/..." paths.
  return chosen.replace(/\/+$/, "");
}
