/**
 * Service address resolution, configurable at deploy time: a
 * <meta name="vitalsqr-service" content="http://host:port"> tag wins,
 * then a window override, then the same origin the page came from.
 */

declare global {
  interface Window {
    VITALSQR_SERVICE_URL?: string;
  }
}

export const DEFAULT_SERVICE_URL = "http://127.0.0.1:8099";

export function resolveServiceUrl(doc: Document | null = null): string {
  const d = doc ?? (typeof document !== "undefined" ? document : null);
  if (d) {
    const meta = d.querySelector('meta[name="vitalsqr-service"]');
    const content = meta?.getAttribute("content");
    if (content) return content.replace(/\/$/, "");
  }
  if (typeof window !== "undefined" && window.VITALSQR_SERVICE_URL) {
    return window.VITALSQR_SERVICE_URL.replace(/\/$/, "");
  }
  return DEFAULT_SERVICE_URL;
}
