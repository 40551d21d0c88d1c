// Canned API bundles covering every rendering shape the UI must survive.

import type { ClarifiedTask, ResultBundle, SqlArtifact, TablePreview } from '../src/types.js';

function clarified(question: string, refined: string): ClarifiedTask {
  return {
    original_question: question,
    main_concepts: ['concept'],
    ambiguities: [{ concept: 'concept', explanation: 'read as the obvious metric' }],
    refined_task: refined,
    detailed_description: 'details',
  };
}

function executed(refined: string, sql: string, preview: TablePreview): SqlArtifact {
  return {
    task: clarified(refined, refined),
    sql,
    status: 'executed',
    refinement_trace: [],
    result_preview: preview,
  };
}

function bundle(
  question: string,
  artifacts: SqlArtifact[],
  charts: (ResultBundle['charts'][number])[],
  answerable = true,
): ResultBundle {
  return {
    datasource_id: 'ds-1',
    question,
    clarified_task: clarified(question, `refined: ${question}`),
    plan: {
      parent: clarified(question, `refined: ${question}`),
      single_sql_answerable: artifacts.length <= 1,
      subtasks:
        artifacts.length > 1
          ? artifacts.map((a, i) => ({ description: `${a.task.refined_task} #${i}`, detail: 'd' }))
          : [],
    },
    plan_id: 'plan-x',
    artifacts,
    artifact_ids: artifacts.map((_, i) => `sql-${i}`),
    charts,
    answerable,
  };
}

export const PIE_BUNDLE = bundle(
  'Revenue share by category?',
  [
    executed('revenue by category', 'SELECT `category`, SUM(`price`) FROM `products` GROUP BY `category`', {
      columns: ['category', 'total'],
      rows: [
        ['electronics', 1850.0],
        ['furniture', 305.0],
        ['books', 120.0],
      ],
    }),
  ],
  [{ chart_type: 'pie', bindings: { label: 'category', value: 'total' } }],
);

export const LINE_PIVOT_BUNDLE = bundle(
  'Daily revenue by country?',
  [
    executed('daily revenue per country', 'SELECT ... GROUP BY day, country', {
      columns: ['day', 'revenue', 'country'],
      rows: [
        ['2023-01-01', 10.0, 'DE'],
        ['2023-01-01', 20.0, 'US'],
        ['2023-01-01', 5.0, 'FR'],
        ['2023-01-02', 12.0, 'DE'],
        ['2023-01-02', 22.0, 'US'],
        ['2023-01-02', 6.0, 'FR'],
      ],
    }),
  ],
  [{ chart_type: 'line', bindings: { x: 'day', y: 'revenue', pivot_column: 'country' } }],
);

export const BAR_BUNDLE = bundle(
  'Orders per status?',
  [
    executed('orders per status', 'SELECT `status`, COUNT(*) FROM `orders` GROUP BY `status`', {
      columns: ['status', 'n'],
      rows: [
        ['shipped', 4],
        ['pending', 1],
        ['cancelled', 1],
      ],
    }),
  ],
  [{ chart_type: 'bar', bindings: { x: 'status', y: 'n' } }],
);

export const TABLE_FALLBACK_BUNDLE = bundle(
  'Show raw orders',
  [
    executed('list raw orders', 'SELECT * FROM `orders`', {
      columns: ['id', 'user_id', 'amount', 'status', 'created_at'],
      rows: [
        [1, 1, 1200.0, 'shipped', '2023-03-01'],
        [2, 1, 95.0, 'shipped', '2023-03-15'],
      ],
    }),
  ],
  [{ chart_type: 'table', bindings: {} }],
);

export const MULTI_SUBTASK_BUNDLE = bundle(
  'Compare volume and revenue by country',
  [
    executed('order count per country', 'SELECT `country`, COUNT(*) ...', {
      columns: ['country', 'order_count'],
      rows: [
        ['DE', 2],
        ['US', 3],
      ],
    }),
    executed('revenue per country', 'SELECT `country`, SUM(`amount`) ...', {
      columns: ['country', 'total'],
      rows: [
        ['DE', 1295.0],
        ['US', 955.0],
      ],
    }),
  ],
  [
    { chart_type: 'bar', bindings: { x: 'country', y: 'order_count' } },
    { chart_type: 'bar', bindings: { x: 'country', y: 'total' } },
  ],
);

export const FAILED_REFINEMENT_BUNDLE: ResultBundle = {
  ...bundle(
    'Show the broken report.',
    [
      {
        task: clarified('Show the broken report.', 'produce the broken report'),
        sql: '',
        status: 'failed',
        refinement_trace: [
          {
            round: 1,
            stage: 'execute',
            error_text: 'datatype mismatch',
            replacement_sql: 'SELECT forever_missing FROM orders',
          },
          {
            round: 2,
            stage: 'explain',
            error_text: 'no such column: forever_missing',
            replacement_sql: 'SELECT forever_missing FROM orders',
          },
        ],
        result_preview: null,
      },
    ],
    [null],
    false,
  ),
};

export const MALFORMED_SPEC_BUNDLE = bundle(
  'Chart with an unknown type',
  [
    executed('weird chart', 'SELECT `a`, `b` FROM `t`', {
      columns: ['a', 'b'],
      rows: [['x', 1]],
    }),
  ],
  [{ chart_type: 'hexbin', bindings: { q: 'nope' } }],
);

export const ALL_BUNDLES: [string, ResultBundle][] = [
  ['pie', PIE_BUNDLE],
  ['line-with-pivot', LINE_PIVOT_BUNDLE],
  ['bar', BAR_BUNDLE],
  ['table-fallback', TABLE_FALLBACK_BUNDLE],
  ['multi-subtask', MULTI_SUBTASK_BUNDLE],
  ['failed-refinement', FAILED_REFINEMENT_BUNDLE],
  ['malformed-spec', MALFORMED_SPEC_BUNDLE],
];
