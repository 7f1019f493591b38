/** Server-sent-events client over fetch.
 *
 * EventSource cannot send the X-Api-Key header, so the stream is read from a
 * fetch body instead: a stateful line parser assembles `event:`/`data:`
 * records separated by blank lines. */
/** Returns a chunk feeder; call it with decoded text as it arrives. */
export function createSseParser(onEvent) {
    let buffer = "";
    let eventName = null;
    let dataLines = [];
    const flush = () => {
        if (eventName !== null || dataLines.length > 0) {
            onEvent({ event: eventName ?? "message", data: dataLines.join("\n") });
        }
        eventName = null;
        dataLines = [];
    };
    return (chunk) => {
        buffer += chunk;
        let newline;
        while ((newline = buffer.indexOf("\n")) >= 0) {
            let line = buffer.slice(0, newline);
            buffer = buffer.slice(newline + 1);
            if (line.endsWith("\r"))
                line = line.slice(0, -1);
            if (line === "") {
                flush();
            }
            else if (line.startsWith("event:")) {
                eventName = line.slice(6).trimStart();
            }
            else if (line.startsWith("data:")) {
                dataLines.push(line.slice(5).trimStart());
            }
            // other SSE fields (id, retry, comments) are ignored
        }
    };
}
/** Read an SSE endpoint until the signal aborts or the server closes. */
export async function readEventStream(url, apiKey, onEvent, signal, fetchFn = (i, n) => fetch(i, n)) {
    const response = await fetchFn(url, {
        headers: { "X-Api-Key": apiKey, Accept: "text/event-stream" },
        signal,
    });
    if (!response.ok || !response.body) {
        throw new Error(`stream failed: HTTP ${response.status}`);
    }
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    const feed = createSseParser(onEvent);
    try {
        for (;;) {
            const { done, value } = await reader.read();
            if (done)
                break;
            feed(decoder.decode(value, { stream: true }));
        }
    }
    finally {
        reader.releaseLock();
    }
}
