/** Wire types for the gateway API. Field names mirror the JSON exactly. */

export interface SearchResultEntry {
  doc_id: string;
  title: string | null;
  url: string | null;
  display_text: string;
  source: string;
  rank: number;
  score: number;
  highlighted: boolean;
}

export interface SearchResponse {
  query_id: string;
  query: string;
  results: SearchResultEntry[];
  timings_s: Record<string, number>;
  warnings: string[];
}

export type GradeScale = "binary" | "graded";

export interface AnnotationItem {
  position: number;
  doc_id: string;
  title: string | null;
  url: string | null;
  display_text: string;
  /** Last submitted grade for this position, or null when unlabeled. */
  grade: number | null;
}

export interface SessionView {
  session_id: string;
  query: string;
  grade_scale: GradeScale;
  left: AnnotationItem[];
  right: AnnotationItem[];
  labeled: number;
  label_total: number;
}

export type Side = "left" | "right";

export interface LabelAck {
  session_id: string;
  side: Side;
  position: number;
  grade: number;
  labeled: number;
}
