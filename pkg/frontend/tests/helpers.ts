import type { FetchLike } from '../src/api';

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

/**
 * Scripted fetch: routes "METHOD path" to a queue of JSON replies and
 * records every call so tests can assert exactly what went over the wire.
 */
export function scriptedFetch(routes: Record<string, Array<{ status?: number; body: unknown }>>) {
  const calls: RecordedCall[] = [];
  const fetchFn: FetchLike = async (url, init) => {
    const method = init?.method ?? 'GET';
    const path = url.replace(/^https?:\/\/[^/]+/, '');
    calls.push({ url, method, body: init?.body ? JSON.parse(init.body as string) : undefined });
    const queue = routes[`${method} ${path}`];
    if (!queue || queue.length === 0) {
      throw new Error(`no scripted response for ${method} ${path}`);
    }
    const next = queue.shift()!;
    return new Response(JSON.stringify(next.body), { status: next.status ?? 200 });
  };
  return { fetchFn, calls };
}
