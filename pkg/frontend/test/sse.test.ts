import { describe, expect, it } from "vitest";

import { createSseParser, readEventStream } from "../src/sse";
import type { SseEvent } from "../src/sse";

describe("sse parser", () => {
  it("parses whole events", () => {
    const events: SseEvent[] = [];
    const feed = createSseParser((e) => events.push(e));
    feed('event: frame\ndata: {"t": "2023-03-01T08:00:00Z"}\n\n');
    feed("event: ping\ndata: {}\n\n");
    expect(events).toEqual([
      { event: "frame", data: '{"t": "2023-03-01T08:00:00Z"}' },
      { event: "ping", data: "{}" },
    ]);
  });

  it("reassembles events split across chunks", () => {
    const events: SseEvent[] = [];
    const feed = createSseParser((e) => events.push(e));
    for (const ch of 'event: frame\ndata: {"a": 1}\n\n') feed(ch);
    expect(events).toEqual([{ event: "frame", data: '{"a": 1}' }]);
  });

  it("joins multi-line data", () => {
    const events: SseEvent[] = [];
    const feed = createSseParser((e) => events.push(e));
    feed("event: frame\ndata: line1\ndata: line2\n\n");
    expect(events[0].data).toBe("line1\nline2");
  });

  it("tolerates CRLF line endings", () => {
    const events: SseEvent[] = [];
    const feed = createSseParser((e) => events.push(e));
    feed("event: ping\r\ndata: {}\r\n\r\n");
    expect(events).toEqual([{ event: "ping", data: "{}" }]);
  });
});

describe("event stream reader", () => {
  it("reads frames from a streamed body until it closes", async () => {
    const chunks = [
      'event: frame\ndata: {"t": 1}\n\n',
      "event: ping\ndata: {}\n\nevent: frame\n",
      'data: {"t": 2}\n\n',
    ];
    const body = new ReadableStream<Uint8Array>({
      start(controller) {
        const encoder = new TextEncoder();
        for (const c of chunks) controller.enqueue(encoder.encode(c));
        controller.close();
      },
    });
    const fetchFn = async (url: string, init?: RequestInit) => {
      expect((init?.headers as Record<string, string>)["X-Api-Key"]).toBe("k.s");
      return new Response(body, { status: 200 });
    };
    const seen: SseEvent[] = [];
    await readEventStream("http://svc/api/stream?metric=m", "k.s", (e) => seen.push(e), new AbortController().signal, fetchFn);
    expect(seen.map((e) => e.event)).toEqual(["frame", "ping", "frame"]);
    expect(JSON.parse(seen[2].data).t).toBe(2);
  });

  it("throws on a rejected stream", async () => {
    const fetchFn = async () => new Response("{}", { status: 401 });
    await expect(
      readEventStream("http://svc/api/stream?metric=m", "bad", () => {}, new AbortController().signal, fetchFn),
    ).rejects.toThrow(/401/);
  });
});
