/** Bootstrap and DOM wiring. All state lives in plain objects; every view
 * is re-rendered from server responses plus local control state, so a
 * reload reproduces the identical view from persisted data. */

import { ApiClient, ApiError } from './api.js';
import {
  applyWhatIf,
  checkStale,
  clampTopFraction,
  equalWeights,
  initialExplorerState,
  renormalise,
  setWeight,
  type ExplorerState,
} from './state.js';
import {
  renderDendrogram,
  renderHeatmap,
  renderQuestion,
  renderRangeBars,
  renderRankingTable,
  renderStaleBanner,
  renderTauBadge,
  renderWeightBar,
  esc,
} from './render.js';
import { WizardFlow, WizardValidationError, weightsFromRatings } from './wizard.js';
import type { AttributeMeta, Classification, RangeNarrowing } from './types.js';

const api = new ApiClient('');

const el = (id: string): HTMLElement => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
};

// -- tabs -------------------------------------------------------------------

function initTabs(): void {
  document.querySelectorAll<HTMLButtonElement>('.tab-button').forEach((btn) => {
    btn.addEventListener('click', () => {
      document.querySelectorAll('.tab-button').forEach((b) => b.classList.remove('active'));
      document.querySelectorAll('.tab-panel').forEach((p) => p.classList.remove('active'));
      btn.classList.add('active');
      el(btn.dataset.panel as string).classList.add('active');
    });
  });
}

// -- wizard ----------------------------------------------------------------------

let attributes: AttributeMeta[] = [];
const wizard = new WizardFlow(api, { onUpdate: () => renderWizard() });
let rankOrder: string[] = [];
let wizardRatings: Record<string, number> = {};

function renderWizard(): void {
  const status = el('wizard-status');
  const host = el('wizard-question');
  const view = wizard.current;
  if (!view) {
    status.textContent = 'Start a session to begin the interview.';
    host.innerHTML = '';
    return;
  }
  status.innerHTML = `session <code>${esc(view.session_id)}</code> &middot; phase <strong>${esc(view.phase)}</strong>`;
  if (view.question === null) {
    const shares = weightsFromRatings(wizardRatings);
    host.innerHTML = `
      <div class="complete-card">
        <h3>Preferences recorded for ${esc(view.stakeholder_id)}</h3>
        <p>Derived weight shares per attribute (display only; the server owns the math):</p>
        ${renderWeightBar(shares, attributes)}
        <p>Gamma and value-function shapes were stored with your answers.</p>
      </div>`;
    return;
  }
  const q = view.question;
  host.innerHTML = renderQuestion(q);
  if (q.type === 'rank-order') {
    rankOrder = q.attributes.map((a) => a.id);
    wireRankOrder();
  } else if (q.type === 'swing-rating') {
    wireSlider('rating-input', 'rating-value');
    host.querySelector('.submit')?.addEventListener('click', () => {
      const input = host.querySelector<HTMLInputElement>('.rating-input');
      submitWizard(Number(input?.value), q.attribute);
    });
    host.querySelector('.decline')?.addEventListener('click', () => submitWizard(0, q.attribute));
    return;
  } else if (q.type === 'bisection') {
    wireSlider('state-input', 'state-value');
    host.querySelector('.submit')?.addEventListener('click', () => {
      const input = host.querySelector<HTMLInputElement>('.state-input');
      submitWizard(Number(input?.value));
    });
    return;
  } else if (q.type === 'compensation') {
    host.querySelectorAll<HTMLButtonElement>('.submit').forEach((btn) => {
      btn.addEventListener('click', () => submitWizard(btn.dataset.response));
    });
    return;
  }
}

function wireRankOrder(): void {
  const host = el('wizard-question');
  const redraw = () => {
    const list = host.querySelector('.rank-list');
    if (!list) return;
    const items = new Map(
      Array.from(host.querySelectorAll<HTMLElement>('.rank-item')).map((n) => [
        n.dataset.attr as string,
        n,
      ]),
    );
    rankOrder.forEach((attr, i) => {
      const node = items.get(attr);
      if (node) {
        list.appendChild(node);
        const pos = node.querySelector('.rank-pos');
        if (pos) pos.textContent = String(i + 1);
      }
    });
  };
  host.querySelectorAll<HTMLButtonElement>('.move-up, .move-down').forEach((btn) => {
    btn.addEventListener('click', () => {
      const attr = btn.dataset.attr as string;
      const idx = rankOrder.indexOf(attr);
      const to = btn.classList.contains('move-up') ? idx - 1 : idx + 1;
      if (to < 0 || to >= rankOrder.length) return;
      [rankOrder[idx], rankOrder[to]] = [rankOrder[to] as string, rankOrder[idx] as string];
      redraw();
    });
  });
  host.querySelector('.submit')?.addEventListener('click', () => submitWizard([...rankOrder]));
}

function wireSlider(inputCls: string, outputCls: string): void {
  const host = el('wizard-question');
  const input = host.querySelector<HTMLInputElement>(`.${inputCls}`);
  const output = host.querySelector<HTMLOutputElement>(`.${outputCls}`);
  input?.addEventListener('input', () => {
    if (output) output.textContent = input.value;
  });
}

async function submitWizard(input: unknown, ratedAttribute?: string): Promise<void> {
  try {
    if (ratedAttribute !== undefined) wizardRatings[ratedAttribute] = Number(input);
    const before = wizard.pending;
    if (before?.type === 'rank-order') {
      wizardRatings = {};
      const first = (input as string[])[0];
      if (first) wizardRatings[first] = 100; // pinned reference, mirrored for display
    }
    await wizard.submit(input);
  } catch (err) {
    showWizardError(err);
  }
}

function showWizardError(err: unknown): void {
  const box = el('wizard-error');
  if (err instanceof WizardValidationError || err instanceof ApiError) {
    box.textContent = `${err.message} - adjust your answer and retry.`;
  } else {
    box.textContent = `network problem - retry: ${String(err)}`;
  }
  setTimeout(() => (box.textContent = ''), 6000);
}

// -- explorer -----------------------------------------------------------------------

let explorer: ExplorerState = initialExplorerState();
let classification: Classification | null = null;
let inflight: AbortController | null = null;

async function initExplorer(): Promise<void> {
  const [health, cls] = await Promise.all([api.health(), api.classification()]);
  explorer = checkStale(explorer, health.run_id);
  classification = cls;
  explorer.topFraction = cls.top_fraction;
  explorer.weights = equalWeights(attributes);
  const select = el('stakeholder-select') as HTMLSelectElement;
  select.innerHTML = Object.keys(cls.occurrence_frequency)
    .map((sh) => `<option value="${esc(sh)}">${esc(sh)}</option>`)
    .join('');
  select.addEventListener('change', () => {
    explorer.stakeholder = select.value;
    void refreshStored();
  });
  explorer.stakeholder = select.value || null;
  renderWeightControls();
  wireExplorerControls();
  try {
    const dendro = await api.clustering();
    el('dendrogram-host').innerHTML = renderDendrogram(dendro);
  } catch {
    el('dendrogram-host').innerHTML = '<p>clustering needs at least two stakeholders</p>';
  }
  el('heatmap-host').innerHTML = renderHeatmap(cls.occurrence_frequency);
  await refreshStored();
}

function renderWeightControls(): void {
  const host = el('weight-controls');
  host.innerHTML = attributes
    .map(
      (a) => `
      <label class="weight-row">
        <span class="weight-name" title="${esc(a.name)}">${esc(a.id)}</span>
        <input type="range" min="0" max="100" step="1" value="${explorer.weights[a.id] ?? 0}"
               data-attr="${esc(a.id)}" class="weight-input" />
      </label>`,
    )
    .join('');
  host.querySelectorAll<HTMLInputElement>('.weight-input').forEach((input) => {
    input.addEventListener('change', () => {
      explorer = setWeight(explorer, input.dataset.attr as string, Number(input.value));
      void refreshWhatIf();
    });
  });
}

function wireExplorerControls(): void {
  const qInput = el('q-input') as HTMLInputElement;
  qInput.addEventListener('change', () => {
    explorer.topFraction = clampTopFraction(Number(qInput.value) / 100);
    el('q-value').textContent = `${Math.round(explorer.topFraction * 100)}%`;
    void refreshWhatIf();
  });
  const gammaInput = el('gamma-input') as HTMLInputElement;
  gammaInput.addEventListener('change', () => {
    explorer.gamma = Number(gammaInput.value);
    el('gamma-value').textContent = gammaInput.value;
    void refreshWhatIf();
  });
  el('reset-whatif').addEventListener('click', () => {
    explorer.weights = equalWeights(attributes);
    renderWeightControls();
    void refreshWhatIf();
  });
}

async function refreshStored(): Promise<void> {
  if (!explorer.stakeholder) return;
  const ranking = await api.rankings(explorer.stakeholder);
  explorer.ranking = ranking.entries;
  el('stored-ranking-host').innerHTML = renderRankingTable(ranking.entries, 15);
  if (classification) {
    const ranges = classification.per_stakeholder_ranges[explorer.stakeholder];
    if (ranges) {
      el('range-host').innerHTML = renderRangeBars(
        ranges as Record<string, RangeNarrowing>,
        explorer.selectedTech,
      );
      wireRangeSelection();
    }
  }
  await refreshWhatIf();
}

function wireRangeSelection(): void {
  el('range-host')
    .querySelectorAll<HTMLElement>('.range-row')
    .forEach((row) => {
      row.addEventListener('click', () => {
        explorer.selectedTech = row.dataset.tech ?? null;
        el('range-host')
          .querySelectorAll('.range-row')
          .forEach((r) => r.classList.toggle('selected', r === row));
      });
    });
}

async function refreshWhatIf(): Promise<void> {
  const weights = renormalise(explorer.weights);
  if (Object.keys(weights).length === 0) return;
  inflight?.abort();
  inflight = new AbortController();
  const health = await api.health();
  explorer = checkStale(explorer, health.run_id);
  el('stale-host').innerHTML = renderStaleBanner(explorer.staleRun);
  const { seq, result } = api.whatif(
    {
      weights,
      gamma: explorer.gamma,
      q: explorer.topFraction,
      ...(explorer.stakeholder ? { baseline_stakeholder: explorer.stakeholder } : {}),
    },
    inflight.signal,
  );
  try {
    const res = await result;
    const before = explorer.lastAppliedSeq;
    explorer = applyWhatIf(explorer, seq, res);
    if (explorer.lastAppliedSeq === before) return; // a newer response already won
    el('whatif-ranking-host').innerHTML = renderRankingTable(res.entries, 15);
    el('tau-host').innerHTML = renderTauBadge(res.tau_distance_to_baseline);
    if (res.top_ranges) {
      el('whatif-range-host').innerHTML = renderRangeBars(
        res.top_ranges as Record<string, RangeNarrowing>,
        explorer.selectedTech,
      );
    }
  } catch (err) {
    if ((err as Error).name !== 'AbortError') {
      el('tau-host').innerHTML = `<span class="error">${esc(String(err))}</span>`;
    }
  }
}

// -- bootstrap ------------------------------------------------------------------------

async function boot(): Promise<void> {
  initTabs();
  attributes = await api.attributes();
  el('start-session').addEventListener('click', () => {
    const input = el('stakeholder-input') as HTMLInputElement;
    const sid = input.value.trim();
    if (!sid) return showWizardError(new WizardValidationError('enter a stakeholder id'));
    void wizard.start(sid).catch(showWizardError);
  });
  el('resume-session').addEventListener('click', () => {
    const input = el('session-input') as HTMLInputElement;
    const sid = input.value.trim();
    if (!sid) return showWizardError(new WizardValidationError('enter a session id'));
    void wizard.resume(sid).catch(showWizardError);
  });
  renderWizard();
  await initExplorer().catch((err) => {
    el('explorer-status').textContent =
      `explorer needs completed pipeline artifacts: ${String(err)}`;
  });
}

document.addEventListener('DOMContentLoaded', () => void boot());
