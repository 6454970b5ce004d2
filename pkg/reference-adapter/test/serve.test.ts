import assert from 'node:assert/strict';
import { test } from 'node:test';
import { PassThrough } from 'node:stream';

import { catalogFromObject } from '../src/catalog.js';
import { ADAPTER_NAME, serve } from '../src/serve.js';

const catalog = catalogFromObject({ ta: 10, tb: 1000, tc: 100 });

async function exchange(lines: string[]): Promise<Record<string, unknown>[]> {
  const input = new PassThrough();
  const output = new PassThrough();
  const done = serve(catalog, input, output);
  for (const line of lines) input.write(`${line}\n`);
  input.end();
  await done;
  const raw = output.read()?.toString('utf-8') ?? '';
  return raw
    .split('\n')
    .filter((l: string) => l.trim())
    .map((l: string) => JSON.parse(l) as Record<string, unknown>);
}

test('handshake reply carries the adapter name', async () => {
  const replies = await exchange(['{"hello": 1}']);
  assert.deepEqual(replies, [{ ready: 1, name: ADAPTER_NAME }]);
});

test('response ids echo request ids', async () => {
  const replies = await exchange([
    '{"hello": 1}',
    '{"id": 7, "query_id": "1a", "sql": "SELECT * FROM ta a, tc c"}',
    '{"id": 9, "query_id": "1b", "sql": "SELECT * FROM ta a, tc c"}',
  ]);
  assert.equal(replies.length, 3);
  assert.equal(replies[1]!.id, 7);
  assert.equal(replies[2]!.id, 9);
});

test('plans arrive as hint comments with empty settings', async () => {
  const replies = await exchange([
    '{"hello": 1}',
    '{"id": 1, "query_id": "1a", "sql": "SELECT * FROM ta a, tb b, tc c"}',
  ]);
  const response = replies[1]!;
  assert.equal(
    response.hints,
    '/*+ Leading(((a c) b)) HashJoin(a c) HashJoin(a b c) SeqScan(a) SeqScan(c) SeqScan(b) */',
  );
  assert.deepEqual(response.settings, []);
  assert.equal(typeof response.meta, 'string');
});

test('single-relation queries get an empty directive', async () => {
  const replies = await exchange([
    '{"hello": 1}',
    '{"id": 2, "query_id": "2a", "sql": "SELECT count(*) FROM ta a"}',
  ]);
  assert.equal(replies[1]!.hints, '');
});

test('garbage lines are dropped without killing the loop', async () => {
  const replies = await exchange([
    '{"hello": 1}',
    'not json at all',
    '{"id": 3, "query_id": "3a", "sql": "SELECT * FROM ta a, tc c"}',
  ]);
  assert.equal(replies.length, 2);
  assert.equal(replies[1]!.id, 3);
});

test('loop exits cleanly on end-of-input', async () => {
  const replies = await exchange([]);
  assert.deepEqual(replies, []);
});
