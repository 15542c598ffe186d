/** DOM builders. Pure rendering: every fact shown on screen is read
 * straight out of a service response. */

import type { Candidate, SchemaResponse, ServiceQuery } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderSchemaSidebar(
  doc: Document,
  schema: SchemaResponse,
): HTMLElement {
  const aside = el(doc, "div", "schema-tree");
  const s = schema.stats;
  aside.appendChild(
    el(
      doc,
      "p",
      "schema-stats",
      `${s.class_count} classes · ${s.total_attributes} attributes · ${s.edge_count} links`,
    ),
  );
  for (const cls of schema.descriptor.classes) {
    const details = el(doc, "details", "schema-class");
    const summary = el(doc, "summary", undefined, cls.name);
    details.appendChild(summary);
    const list = el(doc, "ul");
    for (const attr of cls.attributes) {
      list.appendChild(el(doc, "li", undefined, `${attr.name} (${attr.value_kind})`));
    }
    details.appendChild(list);
    aside.appendChild(details);
  }
  const links = el(doc, "ul", "schema-links");
  for (const rel of schema.descriptor.relationships) {
    links.appendChild(
      el(doc, "li", undefined, `${rel.from} —${rel.label}→ ${rel.to}`),
    );
  }
  aside.appendChild(el(doc, "p", "schema-stats", "relationships"));
  aside.appendChild(links);
  return aside;
}

/** Lists exactly the pairs/triples/joins of the candidate's document. */
function renderBreakdown(doc: Document, q: ServiceQuery): HTMLElement {
  const wrap = el(doc, "div", "breakdown");

  const reported = el(doc, "ul", "reported");
  for (const path of q.select) {
    reported.appendChild(el(doc, "li", undefined, path));
  }
  wrap.appendChild(el(doc, "p", "breakdown-label", `reported (${q.select.length})`));
  wrap.appendChild(reported);

  const constraints = el(doc, "ul", "constraints");
  for (const c of q.constraints) {
    constraints.appendChild(
      el(doc, "li", undefined, `${c.path} ${c.op} ${c.value}`),
    );
  }
  wrap.appendChild(
    el(doc, "p", "breakdown-label", `constraints (${q.constraints.length})`),
  );
  wrap.appendChild(constraints);

  if (q.joins.length > 0) {
    const joins = el(doc, "ul", "joins");
    for (const j of q.joins) {
      joins.appendChild(el(doc, "li", undefined, j));
    }
    wrap.appendChild(el(doc, "p", "breakdown-label", `joins (${q.joins.length})`));
    wrap.appendChild(joins);
  }
  return wrap;
}

export interface CandidateCardHooks {
  onTranslate: (candidate: Candidate, dialect: string, card: HTMLElement) => void;
}

export function renderCandidateCard(
  doc: Document,
  candidate: Candidate,
  rank: number,
  hooks: CandidateCardHooks,
): HTMLElement {
  const card = el(doc, "article", "candidate");
  card.dataset.rank = String(rank);

  // Paraphrase first: it is how a person decides between candidates.
  card.appendChild(el(doc, "p", "paraphrase", candidate.paraphrase));
  card.appendChild(
    el(doc, "p", "score", `#${rank} · score ${candidate.score.toFixed(4)}`),
  );
  card.appendChild(renderBreakdown(doc, candidate.query_graph));

  const controls = el(doc, "div", "dialects");
  for (const dialect of ["sql", "cypher", "service"]) {
    const button = el(doc, "button", "dialect", dialect);
    button.type = "button";
    button.dataset.dialect = dialect;
    button.addEventListener("click", () =>
      hooks.onTranslate(candidate, dialect, card),
    );
    controls.appendChild(button);
  }
  card.appendChild(controls);
  return card;
}

/** Replaces the card's code panel with the service's text, verbatim. */
export function showQueryText(
  doc: Document,
  card: HTMLElement,
  dialect: string,
  text: string,
): void {
  card.querySelector(".query-panel")?.remove();
  card.querySelector(".card-error")?.remove();
  const panel = el(doc, "div", "query-panel");
  panel.dataset.dialect = dialect;
  const code = el(doc, "pre", "query-text");
  code.textContent = text;
  const copy = el(doc, "button", "copy", "copy");
  copy.type = "button";
  copy.addEventListener("click", () => {
    void doc.defaultView?.navigator.clipboard?.writeText(text);
  });
  panel.appendChild(copy);
  panel.appendChild(code);
  card.appendChild(panel);
}

export function showCardError(
  doc: Document,
  card: HTMLElement,
  message: string,
): void {
  card.querySelector(".card-error")?.remove();
  card.appendChild(el(doc, "p", "card-error", message));
}

export function renderNoInterpretation(
  doc: Document,
  failures: number,
): HTMLElement {
  return el(
    doc,
    "p",
    "no-interpretation",
    `No interpretation found (${failures} unparseable beam${failures === 1 ? "" : "s"}).`,
  );
}
