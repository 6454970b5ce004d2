import assert from 'node:assert/strict';
import { test } from 'node:test';

import { catalogFromObject } from '../src/catalog.js';
import { heuristicPlan, joinOrder, leadingGroup, renderLeftDeepHints } from '../src/planner.js';

const catalog = catalogFromObject({ ta: 10, tb: 1000, tc: 100 });

test('join order sorts by ascending row count', () => {
  const refs = [
    { table: 'ta', alias: 'a' },
    { table: 'tb', alias: 'b' },
    { table: 'tc', alias: 'c' },
  ];
  assert.deepEqual(
    joinOrder(refs, catalog).map((r) => r.alias),
    ['a', 'c', 'b'],
  );
});

test('equal row counts tie-break alphabetically', () => {
  const tied = catalogFromObject({ tx: 50, ty: 50 });
  const refs = [
    { table: 'ty', alias: 'b' },
    { table: 'tx', alias: 'a' },
  ];
  assert.deepEqual(
    joinOrder(refs, tied).map((r) => r.alias),
    ['a', 'b'],
  );
});

test('leading group folds left-deep', () => {
  assert.equal(leadingGroup(['a', 'c', 'b']), '((a c) b)');
  assert.equal(leadingGroup(['a', 'b']), '(a b)');
  assert.equal(leadingGroup(['x']), 'x');
});

test('three-relation worked example', () => {
  const hints = heuristicPlan('SELECT * FROM ta a, tb b, tc c WHERE a.id = b.id', catalog);
  assert.equal(
    hints,
    '/*+ Leading(((a c) b)) HashJoin(a c) HashJoin(a b c) SeqScan(a) SeqScan(c) SeqScan(b) */',
  );
});

test('join atoms name sorted alias sets', () => {
  const hints = renderLeftDeepHints(['z', 'a']);
  assert.equal(hints, '/*+ Leading((z a)) HashJoin(a z) SeqScan(z) SeqScan(a) */');
});

test('single relation yields an empty directive', () => {
  assert.equal(heuristicPlan('SELECT * FROM ta a', catalog), '');
});

test('unparseable FROM degrades to an empty directive', () => {
  assert.equal(heuristicPlan('SELECT * FROM (SELECT 1) sub, ta a', catalog), '');
});

test('unknown relations use the fallback count', () => {
  const sparse = catalogFromObject({ known: 5 }, 999999);
  const hints = heuristicPlan('SELECT 1 FROM known k, mystery m', sparse);
  assert.equal(
    hints,
    '/*+ Leading((k m)) HashJoin(k m) SeqScan(k) SeqScan(m) */',
  );
});

test('deterministic output for fixed inputs', () => {
  const sql = 'SELECT * FROM ta a, tb b, tc c';
  assert.equal(heuristicPlan(sql, catalog), heuristicPlan(sql, catalog));
});
