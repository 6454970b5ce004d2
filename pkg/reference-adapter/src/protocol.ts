/**
 * Wire protocol types and framing.
 *
 * The harness speaks line-delimited JSON over stdin/stdout: a handshake
 * ({"hello": 1} -> {"ready": 1, "name": ...}) followed by request/response
 * pairs matched by id. Every message is exactly one line.
 */

export interface Handshake {
  hello: number;
}

export interface HandshakeReply {
  ready: 1;
  name: string;
}

export interface PlanRequest {
  id: number;
  query_id: string;
  sql: string;
}

export interface PlanResponse {
  id: number;
  hints: string;
  settings: [string, string][];
  meta: string;
}

export type Incoming =
  | { kind: 'handshake' }
  | { kind: 'request'; request: PlanRequest }
  | { kind: 'invalid'; reason: string };

export function encodeLine(message: HandshakeReply | PlanResponse): string {
  return `${JSON.stringify(message)}\n`;
}

/** Classify one incoming line; never throws. */
export function decodeLine(line: string): Incoming {
  const trimmed = line.trim();
  if (!trimmed) return { kind: 'invalid', reason: 'empty line' };
  let parsed: unknown;
  try {
    parsed = JSON.parse(trimmed);
  } catch {
    return { kind: 'invalid', reason: 'not JSON' };
  }
  if (typeof parsed !== 'object' || parsed === null || Array.isArray(parsed)) {
    return { kind: 'invalid', reason: 'not a JSON object' };
  }
  const doc = parsed as Record<string, unknown>;
  if (typeof doc.hello === 'number') return { kind: 'handshake' };
  if (typeof doc.id === 'number' && typeof doc.sql === 'string') {
    return {
      kind: 'request',
      request: {
        id: doc.id,
        query_id: typeof doc.query_id === 'string' ? doc.query_id : '',
        sql: doc.sql,
      },
    };
  }
  return { kind: 'invalid', reason: 'neither handshake nor plan request' };
}
