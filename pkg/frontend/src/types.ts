// View-model types mirroring the API's JSON result bundle. The UI renders
// strictly from these payloads; it never re-derives pipeline logic.

export interface Ambiguity {
  concept: string;
  explanation: string;
}

export interface ClarifiedTask {
  original_question: string;
  main_concepts: string[];
  ambiguities: Ambiguity[];
  refined_task: string;
  detailed_description: string;
}

export interface Subtask {
  description: string;
  detail: string;
}

export interface DecompositionPlan {
  parent: ClarifiedTask;
  single_sql_answerable: boolean;
  subtasks: Subtask[];
}

export interface RefineRound {
  round: number;
  stage: 'explain' | 'execute';
  error_text: string;
  replacement_sql: string;
}

export interface TablePreview {
  columns: string[];
  rows: (string | number | null)[][];
}

export interface SqlArtifact {
  task: ClarifiedTask;
  sql: string;
  status: 'generated' | 'explain_ok' | 'executed' | 'failed';
  refinement_trace: RefineRound[];
  result_preview: TablePreview | null;
}

export interface ChartSpec {
  chart_type: string;
  bindings: Record<string, string>;
}

export interface ResultBundle {
  datasource_id: string;
  question: string;
  clarified_task: ClarifiedTask;
  plan: DecompositionPlan;
  plan_id: string;
  artifacts: SqlArtifact[];
  artifact_ids: string[];
  charts: (ChartSpec | null)[];
  answerable: boolean;
}

export interface JobState {
  id: string;
  kind: 'hdc_build' | 'question_run';
  state: 'queued' | 'running' | 'done' | 'failed';
  progress: string;
  result_ref: string | null;
  error: string | null;
}

export interface SuggestedQuestion {
  text: string;
  analysis_type: string;
}

export interface HistoryEntry {
  jobId: string;
  bundle: ResultBundle;
}
