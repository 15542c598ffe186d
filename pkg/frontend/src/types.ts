/** Wire types for the /v1/ service. The console treats these as opaque
 * display data: it never derives or edits query structure on its own. */

export interface SchemaAttribute {
  name: string;
  value_kind: string;
}

export interface SchemaClass {
  name: string;
  instance_count?: number;
  attributes: SchemaAttribute[];
}

export interface SchemaRelationship {
  from: string;
  to: string;
  label: string;
}

export interface SchemaResponse {
  descriptor: {
    classes: SchemaClass[];
    relationships: SchemaRelationship[];
  };
  stats: {
    class_count: number;
    total_attributes: number;
    unique_attributes: number;
    edge_count: number;
  };
}

export interface ServiceConstraint {
  path: string;
  op: string;
  value: string;
}

export interface ServiceQuery {
  select: string[];
  constraints: ServiceConstraint[];
  joins: string[];
}

export interface Candidate {
  query_graph: ServiceQuery;
  score: number;
  paraphrase: string;
  target: string;
}

export interface PredictResponse {
  candidates: Candidate[];
  failures: number;
}

export interface TranslateResponse {
  query_text: string;
}

export type Dialect = "sql" | "cypher" | "service";

export const DIALECTS: Dialect[] = ["sql", "cypher", "service"];
export const K_CHOICES = [1, 3, 5];
