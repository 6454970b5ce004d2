/**
 * The protocol loop: handshake, then one response per request, until
 * end-of-input. Single-threaded and synchronous per exchange, as the
 * harness serializes adapter calls anyway.
 */

import { createInterface } from 'node:readline';
import type { Readable, Writable } from 'node:stream';

import type { CatalogSnapshot } from './catalog.js';
import { heuristicPlan, planMeta } from './planner.js';
import { decodeLine, encodeLine } from './protocol.js';

export const ADAPTER_NAME = 'greedy-leftdeep';

export function serve(
  catalog: CatalogSnapshot,
  input: Readable,
  output: Writable,
): Promise<void> {
  const lines = createInterface({ input, crlfDelay: Infinity });
  return new Promise((resolve) => {
    lines.on('line', (line) => {
      const incoming = decodeLine(line);
      if (incoming.kind === 'handshake') {
        output.write(encodeLine({ ready: 1, name: ADAPTER_NAME }));
        return;
      }
      if (incoming.kind === 'request') {
        const { id, sql } = incoming.request;
        output.write(
          encodeLine({
            id,
            hints: heuristicPlan(sql, catalog),
            settings: [],
            meta: planMeta(sql, catalog),
          }),
        );
      }
      // invalid lines are dropped; the harness owns protocol enforcement
    });
    lines.on('close', resolve);
  });
}
