import assert from 'node:assert/strict';
import { test } from 'node:test';

import { decodeLine, encodeLine } from '../src/protocol.js';

test('handshake detection', () => {
  assert.deepEqual(decodeLine('{"hello": 1}'), { kind: 'handshake' });
});

test('request decoding', () => {
  const incoming = decodeLine('{"id": 7, "query_id": "1a", "sql": "SELECT 1"}');
  assert.deepEqual(incoming, {
    kind: 'request',
    request: { id: 7, query_id: '1a', sql: 'SELECT 1' },
  });
});

test('non-JSON lines are invalid, not thrown', () => {
  assert.equal(decodeLine('plain text').kind, 'invalid');
  assert.equal(decodeLine('').kind, 'invalid');
  assert.equal(decodeLine('[1, 2]').kind, 'invalid');
  assert.equal(decodeLine('{"id": "not a number", "sql": "x"}').kind, 'invalid');
});

test('responses encode as single lines', () => {
  const line = encodeLine({ id: 1, hints: '', settings: [], meta: '' });
  assert.ok(line.endsWith('\n'));
  assert.equal(line.slice(0, -1).includes('\n'), false);
  assert.deepEqual(JSON.parse(line), { id: 1, hints: '', settings: [], meta: '' });
});

test('handshake reply shape', () => {
  const line = encodeLine({ ready: 1, name: 'greedy-leftdeep' });
  assert.deepEqual(JSON.parse(line), { ready: 1, name: 'greedy-leftdeep' });
});
