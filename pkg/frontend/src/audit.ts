/**
 * Public audit view: chain table, hex character frequency chart, and bit
 * distribution chart, all computed by counting characters of hashes the
 * service already produced. No hashing happens in the browser.
 */

import { AnalysisResponse, ApiClient, ChainListing } from "./api.js";

export const HEX_CHARS = "0123456789abcdef";

// ones per hex nibble, indexed by its value
const NIBBLE_ONES = [0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4] as const;

/** Count every hex character across the listing's block hashes. */
export function charFrequency(listing: ChainListing): Record<string, number> {
  const counts: Record<string, number> = {};
  for (const c of HEX_CHARS) counts[c] = 0;
  for (const block of listing.blocks) {
    for (const c of block.block_hash) {
      if (counts[c] === undefined) {
        throw new Error(`block hash contains a non-hex character '${c}'`);
      }
      counts[c] += 1;
    }
  }
  return counts;
}

/** Zero/one bit counts of a service-provided hex digest. */
export function bitCounts(hexDigest: string): { zeros: number; ones: number } {
  let ones = 0;
  for (const c of hexDigest) {
    const nibble = parseInt(c, 16);
    if (Number.isNaN(nibble)) {
      throw new Error(`digest contains a non-hex character '${c}'`);
    }
    ones += NIBBLE_ONES[nibble]!;
  }
  return { zeros: hexDigest.length * 4 - ones, ones };
}

export function renderChainTable(container: HTMLElement, listing: ChainListing): void {
  const table = document.createElement("table");
  table.className = "chain-table";
  const caption = document.createElement("caption");
  caption.textContent =
    listing.combined_hash === null
      ? `${listing.chain} chain (empty)`
      : `${listing.chain} chain, combined hash ${listing.combined_hash}`;
  table.appendChild(caption);
  const thead = document.createElement("thead");
  const headRow = document.createElement("tr");
  for (const label of ["index", "previous_hash", "block_hash"]) {
    const th = document.createElement("th");
    th.textContent = label;
    headRow.appendChild(th);
  }
  thead.appendChild(headRow);
  table.appendChild(thead);
  const tbody = document.createElement("tbody");
  for (const block of listing.blocks) {
    const row = document.createElement("tr");
    for (const value of [String(block.index), block.previous_hash, block.block_hash]) {
      const td = document.createElement("td");
      td.textContent = value;
      row.appendChild(td);
    }
    tbody.appendChild(row);
  }
  table.appendChild(tbody);
  container.replaceChildren(table);
}

/** Horizontal-axis bar chart built from divs; heights scale to the maximum. */
export function renderBarChart(
  container: HTMLElement,
  values: Record<string, number>,
  title: string,
): void {
  const chart = document.createElement("figure");
  chart.className = "bar-chart";
  const caption = document.createElement("figcaption");
  caption.textContent = title;
  chart.appendChild(caption);
  const bars = document.createElement("div");
  bars.className = "bars";
  const max = Math.max(1, ...Object.values(values));
  for (const [label, value] of Object.entries(values)) {
    const item = document.createElement("div");
    item.className = "bar-item";
    const bar = document.createElement("div");
    bar.className = "bar";
    bar.dataset.value = String(value);
    bar.style.height = `${Math.round((100 * value) / max)}%`;
    bar.title = `${label}: ${value}`;
    const tick = document.createElement("span");
    tick.className = "bar-label";
    tick.textContent = label;
    item.appendChild(bar);
    item.appendChild(tick);
    bars.appendChild(item);
  }
  chart.appendChild(bars);
  container.replaceChildren(chart);
}

export function renderHeadline(container: HTMLElement, analysis: AnalysisResponse): void {
  const panel = document.createElement("dl");
  panel.className = "headline-metrics";
  const rows: Array<[string, string]> = [
    ["Entropy", analysis.entropy.toFixed(4)],
    ["Avalanche Effect", `${(100 * analysis.avalanche_fraction).toFixed(2)}%`],
    ["Collision Resistance", analysis.collision_free ? "True" : "False"],
    ["Hamming Weight %", `${analysis.hamming_weight_pct.toFixed(2)}%`],
  ];
  for (const [label, value] of rows) {
    const dt = document.createElement("dt");
    dt.textContent = label;
    const dd = document.createElement("dd");
    dd.textContent = value;
    panel.appendChild(dt);
    panel.appendChild(dd);
  }
  const note = document.createElement("p");
  note.className = "avalanche-note";
  note.textContent = analysis.avalanche_note;
  container.replaceChildren(panel, note);
}

export interface AuditSections {
  table: HTMLElement;
  charChart: HTMLElement;
  bitChart: HTMLElement;
  headline: HTMLElement;
  status: HTMLElement;
}

/** Render one chain into the audit sections. Pure DOM, no fetching. */
export function renderAuditView(sections: AuditSections, listing: ChainListing): void {
  renderChainTable(sections.table, listing);
  renderBarChart(sections.charChart, charFrequency(listing), "Character Frequency");
  if (listing.combined_hash === null) {
    sections.bitChart.replaceChildren();
  } else {
    const bits = bitCounts(listing.combined_hash);
    renderBarChart(
      sections.bitChart,
      { "0": bits.zeros, "1": bits.ones },
      "Bit Distribution of the Combined Hash",
    );
  }
}

/**
 * Fetch a chain and render it; headline metrics appear only when an admin
 * token is supplied and accepted, and are skipped quietly otherwise.
 */
export async function loadAuditView(
  api: ApiClient,
  sections: AuditSections,
  chain: "registry" | "votes",
  adminToken?: string,
): Promise<void> {
  try {
    renderAuditView(sections, await api.chain(chain));
    sections.status.textContent = "";
  } catch {
    // leave the previous rendering in place, just say the refresh failed
    sections.status.textContent = "Could not load the chain from the service.";
    return;
  }
  if (adminToken) {
    try {
      renderHeadline(sections.headline, await api.analysis(adminToken));
    } catch {
      sections.headline.replaceChildren();
    }
  }
}
