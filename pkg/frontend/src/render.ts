/** Pure view builders: data in, HTML/SVG strings out. No fetches, no state. */

import type {
  AttributeMeta,
  Dendrogram,
  Question,
  RangeNarrowing,
  RankingEntry,
} from './types.js';

export function esc(text: string): string {
  return text
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;');
}

export function fmt(x: number, digits = 2): string {
  if (!Number.isFinite(x)) return '-';
  const abs = Math.abs(x);
  if (abs !== 0 && (abs >= 100000 || abs < 0.01)) return x.toExponential(2);
  return x.toLocaleString('en-US', { maximumFractionDigits: digits });
}

// -- wizard ---------------------------------------------------------------

export function renderQuestion(q: Question): string {
  switch (q.type) {
    case 'rank-order': {
      const items = q.attributes
        .map(
          (a, i) => `
        <li class="rank-item" data-attr="${esc(a.id)}">
          <span class="rank-pos">${i + 1}</span>
          <span class="rank-name">${esc(a.name)}</span>
          <span class="rank-unit">${esc(a.unit)}</span>
          <span class="rank-swing">${fmt(a.worst)} &rarr; ${fmt(a.best)}</span>
          <button class="move-up" data-attr="${esc(a.id)}" title="move up">&uarr;</button>
          <button class="move-down" data-attr="${esc(a.id)}" title="move down">&darr;</button>
        </li>`,
        )
        .join('');
      return `
      <div class="question rank-order">
        <p class="prompt">${esc(q.prompt)}</p>
        <ol class="rank-list">${items}</ol>
        <button class="submit" data-kind="rank-order">Confirm order</button>
      </div>`;
    }
    case 'swing-rating':
      return `
      <div class="question swing-rating">
        <p class="prompt">${esc(q.prompt)}</p>
        <div class="slider-row">
          <input type="range" class="rating-input" min="0" max="${q.ceiling}" step="1"
                 value="${Math.round(q.ceiling / 2)}" />
          <output class="rating-value">${Math.round(q.ceiling / 2)}</output>
          <span class="pinned-note">most important = 100</span>
        </div>
        <button class="submit" data-kind="swing-rating">Submit rating</button>
        <button class="decline" data-kind="swing-rating">Decline (0)</button>
      </div>`;
    case 'bisection': {
      const [a, b] = q.interval;
      const lo = Math.min(a, b);
      const hi = Math.max(a, b);
      const mid = (lo + hi) / 2;
      const step = (hi - lo) / 1000 || 1;
      return `
      <div class="question bisection">
        <p class="prompt">${esc(q.prompt)}</p>
        <div class="slider-row">
          <span>${fmt(lo)}</span>
          <input type="range" class="state-input" min="${lo}" max="${hi}" step="${step}"
                 value="${mid}" />
          <span>${fmt(hi)}</span>
          <output class="state-value">${fmt(mid)}</output>
        </div>
        <p class="hint">target value ${q.target_value}</p>
        <button class="submit" data-kind="bisection">Submit state</button>
      </div>`;
    }
    case 'compensation': {
      const card = (label: string, states: Record<string, number>) => `
        <div class="alt-card">
          <h4>${label}</h4>
          <ul>${Object.entries(states)
            .map(([attr, v]) => `<li>${esc(attr)}: ${fmt(v)}</li>`)
            .join('')}</ul>
        </div>`;
      return `
      <div class="question compensation">
        <p class="prompt">${esc(q.prompt)} <em>(probe ${q.probe}/${q.of_probes})</em></p>
        <div class="alt-cards">
          ${card('Alternative A', q.alternative_a)}
          ${card('Alternative B', q.alternative_b)}
        </div>
        ${q.responses
          .map((r) => `<button class="submit" data-kind="compensation" data-response="${esc(r)}">${esc(r)}</button>`)
          .join(' ')}
      </div>`;
    }
  }
}

const OBJECTIVE_COLORS = ['#2b6cb0', '#2f855a', '#b7791f', '#805ad5', '#c05621', '#319795'];

export function objectiveColor(objectives: string[], objective: string): string {
  const idx = Math.max(0, objectives.indexOf(objective));
  return OBJECTIVE_COLORS[idx % OBJECTIVE_COLORS.length] as string;
}

/** Stacked weight bar, one segment per attribute, grouped and coloured by
 * high-level objective (shares must already sum to 1). */
export function renderWeightBar(
  shares: Record<string, number>,
  attributes: AttributeMeta[],
): string {
  const objectives = [...new Set(attributes.map((a) => a.objective))];
  const segments = attributes
    .filter((a) => (shares[a.id] ?? 0) > 0)
    .map((a) => {
      const w = shares[a.id] ?? 0;
      const color = objectiveColor(objectives, a.objective);
      return `<div class="weight-seg" data-attr="${esc(a.id)}" title="${esc(a.name)}: ${(w * 100).toFixed(1)}%"
        style="width:${(w * 100).toFixed(2)}%;background:${color}"></div>`;
    })
    .join('');
  const legend = objectives
    .map(
      (o) =>
        `<span class="legend-item"><span class="legend-dot" style="background:${objectiveColor(objectives, o)}"></span>${esc(
          attributes.find((a) => a.objective === o)?.objective_name || o,
        )}</span>`,
    )
    .join(' ');
  return `<div class="weight-bar">${segments}</div><div class="legend">${legend}</div>`;
}

// -- explorer -----------------------------------------------------------------

export function renderRankingTable(
  entries: RankingEntry[],
  limit: number,
  optimumId = 'optimum',
): string {
  const optimum = entries.find((e) => e.alternative_id === optimumId);
  const marker = optimum
    ? `<p class="optimum-marker">cost optimum ranks <strong>#${optimum.rank}</strong> of ${entries.length}</p>`
    : '';
  const rows = entries
    .slice(0, limit)
    .map(
      (e) => `
      <tr class="${e.alternative_id === optimumId ? 'optimum-row' : ''}">
        <td>${e.rank}</td><td>${esc(e.alternative_id)}</td><td>${e.value.toFixed(4)}</td>
      </tr>`,
    )
    .join('');
  return `${marker}<table class="ranking"><thead><tr><th>rank</th><th>alternative</th><th>value</th></tr></thead><tbody>${rows}</tbody></table>`;
}

/** Generation-range bars: the full span of each technology across all
 * alternatives with the top-slice span overlaid. */
export function renderRangeBars(
  ranges: Record<string, RangeNarrowing>,
  selected: string | null = null,
): string {
  const scale = Math.max(
    1e-9,
    ...Object.values(ranges).map((r) => r.full[1]),
  );
  const rows = Object.entries(ranges)
    .map(([tech, r]) => {
      const fullLeft = (r.full[0] / scale) * 100;
      const fullWidth = ((r.full[1] - r.full[0]) / scale) * 100;
      const top = r.top
        ? `<div class="range-top" style="left:${((r.top[0] / scale) * 100).toFixed(2)}%;width:${(((r.top[1] - r.top[0]) / scale) * 100).toFixed(2)}%"></div>`
        : '';
      const cls = tech === selected ? 'range-row selected' : 'range-row';
      return `
      <div class="${cls}" data-tech="${esc(tech)}">
        <span class="range-label">${esc(tech)}</span>
        <div class="range-track">
          <div class="range-full" style="left:${fullLeft.toFixed(2)}%;width:${Math.max(fullWidth, 0.5).toFixed(2)}%"></div>
          ${top}
        </div>
        <span class="range-reduction">${r.top && r.reduction >= 0.005 ? `-${(r.reduction * 100).toFixed(0)}%` : ''}</span>
      </div>`;
    })
    .join('');
  return `<div class="range-bars">${rows}</div>`;
}

/** Colour scale for occurrence frequencies: white (never) to deep green (always). */
export function freqColor(f: number): string {
  const clamped = Math.min(1, Math.max(0, f));
  const light = 97 - clamped * 55;
  return `hsl(150, 45%, ${light.toFixed(1)}%)`;
}

export function renderHeatmap(freq: Record<string, Record<string, number>>): string {
  const stakeholders = Object.keys(freq);
  if (stakeholders.length === 0) return '<p>no frequency data</p>';
  const techs = Object.keys(freq[stakeholders[0] as string] ?? {});
  const header = techs.map((t) => `<th class="rot"><span>${esc(t)}</span></th>`).join('');
  const rows = stakeholders
    .map((sh) => {
      const cells = techs
        .map((t) => {
          const f = freq[sh]?.[t] ?? 0;
          const label = f < 1 ? (f * 100).toFixed(0) : '';
          return `<td style="background:${freqColor(f)}" title="${esc(sh)} / ${esc(t)}: ${(f * 100).toFixed(0)}%">${label}</td>`;
        })
        .join('');
      return `<tr><th>${esc(sh)}</th>${cells}</tr>`;
    })
    .join('');
  return `<table class="heatmap"><thead><tr><th></th>${header}</tr></thead><tbody>${rows}</tbody></table>`;
}

// -- dendrogram ----------------------------------------------------------------

export interface DendroSegment {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface DendroLayout {
  leaves: Array<{ label: string; y: number }>;
  segments: DendroSegment[];
  maxHeight: number;
}

/** Horizontal dendrogram layout: leaves spaced on y, merge height on x. */
export function dendrogramLayout(dendro: Dendrogram): DendroLayout {
  const n = dendro.labels.length;
  const pos = new Map<number, { y: number; h: number }>();
  dendro.labels.forEach((_, i) => pos.set(i, { y: i + 1, h: 0 }));
  const segments: DendroSegment[] = [];
  let maxHeight = 0;
  dendro.merges.forEach((m, k) => {
    const a = pos.get(m.left);
    const b = pos.get(m.right);
    if (!a || !b) throw new Error(`merge ${k} references unknown cluster`);
    const h = m.height;
    maxHeight = Math.max(maxHeight, h);
    segments.push({ x1: a.h, y1: a.y, x2: h, y2: a.y }); // left arm
    segments.push({ x1: b.h, y1: b.y, x2: h, y2: b.y }); // right arm
    segments.push({ x1: h, y1: a.y, x2: h, y2: b.y }); // joining bar
    pos.set(n + k, { y: (a.y + b.y) / 2, h });
  });
  return {
    leaves: dendro.labels.map((label, i) => ({ label, y: i + 1 })),
    segments,
    maxHeight: maxHeight || 1,
  };
}

export function renderDendrogram(dendro: Dendrogram, width = 420, rowHeight = 26): string {
  const layout = dendrogramLayout(dendro);
  const labelSpace = 110;
  const plotWidth = width - labelSpace - 10;
  const height = (layout.leaves.length + 1) * rowHeight;
  const sx = (h: number) => labelSpace + (h / layout.maxHeight) * plotWidth;
  const sy = (y: number) => y * rowHeight;
  const lines = layout.segments
    .map(
      (s) =>
        `<line x1="${sx(s.x1).toFixed(1)}" y1="${sy(s.y1).toFixed(1)}" x2="${sx(s.x2).toFixed(1)}" y2="${sy(s.y2).toFixed(1)}" />`,
    )
    .join('');
  const labels = layout.leaves
    .map(
      (l) =>
        `<text x="${labelSpace - 8}" y="${(sy(l.y) + 4).toFixed(1)}" text-anchor="end">${esc(l.label)}</text>`,
    )
    .join('');
  return `<svg class="dendrogram" viewBox="0 0 ${width} ${height}" width="${width}" height="${height}">
    <g class="links" stroke="#4a5568" fill="none">${lines}</g>
    <g class="labels" font-size="12">${labels}</g>
  </svg>`;
}

export function renderStaleBanner(stale: boolean): string {
  return stale
    ? '<div class="stale-banner">The run behind this view changed on the server; reload to see current results.</div>'
    : '';
}

export function renderTauBadge(tau: number | null): string {
  if (tau === null) return '';
  return `<span class="tau-badge" title="Kendall tau distance to the stored ranking">&tau; distance ${tau.toFixed(4)}</span>`;
}
