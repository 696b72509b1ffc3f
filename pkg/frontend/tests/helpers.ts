import type { FetchLike } from "../src/api.js";

export interface CannedResponse {
  status: number;
  body: unknown;
}

export interface RecordedCall {
  method: string;
  url: string;
  body?: unknown;
}

/** Routes "METHOD path" to canned responses and records every call. */
export function routedFetch(
  routes: Record<string, CannedResponse | CannedResponse[]>,
): { fetch: FetchLike; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const queues = new Map<string, CannedResponse[]>();
  for (const [key, value] of Object.entries(routes)) {
    queues.set(key, Array.isArray(value) ? [...value] : [value]);
  }
  const fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    calls.push({
      method,
      url: path,
      body: init?.body ? JSON.parse(init.body) : undefined,
    });
    const key = `${method} ${path}`;
    const queue = queues.get(key);
    if (!queue || queue.length === 0) {
      throw new Error(`no canned response for ${key}`);
    }
    const next = queue.length > 1 ? queue.shift()! : queue[0]!;
    return { status: next.status, json: async () => next.body };
  };
  return { fetch, calls };
}

export function ok(body: unknown): CannedResponse {
  return { status: 200, body };
}
