/**
 * App shell: registration wizard, login + ballot, receipt display, and the
 * public audit view, wired to the JSON API. Session tokens and the saved
 * b_identity live in closure variables only.
 */

import { ApiClient, Receipt } from "./api.js";
import { AuditSections, loadAuditView } from "./audit.js";
import {
  FactorInputs,
  VoterSession,
  ballotFlow,
  describeError,
  loginFlow,
  registrationFlow,
} from "./flows.js";
import { mountRotationWidget } from "./widget.js";

export interface CandidateOption {
  candidateId: string;
  displayName: string;
}

export interface AppConfig {
  api: ApiClient;
  imageCount: number;
  /** Ballot roster; the API has no public roster endpoint by design. */
  candidates: CandidateOption[];
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

async function fileBytes(input: HTMLInputElement): Promise<Uint8Array> {
  const file = input.files?.[0];
  if (!file) throw new Error("choose a file first");
  return new Uint8Array(await file.arrayBuffer());
}

function factorForm(
  imageCount: number,
  submitLabel: string,
): { form: HTMLFormElement; collect: () => Promise<FactorInputs>; reset: () => void } {
  const form = el("form", "factor-form");

  const kindSelect = el("select");
  for (const kind of ["AADHAAR", "DRIVING_LICENSE"]) {
    const option = el("option", undefined, kind);
    option.value = kind;
    kindSelect.appendChild(option);
  }
  const docInput = el("input");
  docInput.type = "file";
  docInput.name = "document";
  const fpInput = el("input");
  fpInput.type = "file";
  fpInput.name = "fingerprint";
  fpInput.accept = ".json,image/*,.bin";

  const widget = mountRotationWidget(imageCount);

  form.appendChild(labeled("ID type", kindSelect));
  form.appendChild(labeled("ID document scan", docInput));
  form.appendChild(labeled("Fingerprint scan or minutiae template (.json)", fpInput));
  form.appendChild(labeled("Rotate each image to your pattern", widget.element));
  const submit = el("button", "primary", submitLabel);
  submit.type = "submit";
  form.appendChild(submit);

  async function collect(): Promise<FactorInputs> {
    const fpFile = fpInput.files?.[0];
    if (!fpFile) throw new Error("choose a fingerprint file first");
    const fingerprint = fpFile.name.endsWith(".json")
      ? { template: JSON.parse(await fpFile.text()) }
      : { raw: new Uint8Array(await fpFile.arrayBuffer()) };
    return {
      idKind: kindSelect.value as FactorInputs["idKind"],
      documentBytes: await fileBytes(docInput),
      fingerprint,
      pattern: widget.pattern(),
      imageCount,
    };
  }

  return {
    form,
    collect,
    reset() {
      form.reset();
      widget.reset();
    },
  };
}

function labeled(text: string, control: HTMLElement): HTMLElement {
  const wrap = el("label", "field");
  wrap.appendChild(el("span", "field-label", text));
  wrap.appendChild(control);
  return wrap;
}

function renderReceipt(container: HTMLElement, receipt: Receipt): void {
  const card = el("div", "receipt-card");
  card.appendChild(el("h3", undefined, "Ballot recorded"));
  const dl = el("dl");
  for (const [label, value] of [
    ["Vote digest (b_vote)", receipt.b_vote],
    ["Block index", String(receipt.block_index)],
    ["Election", receipt.election_id],
  ] as const) {
    dl.appendChild(el("dt", undefined, label));
    dl.appendChild(el("dd", "mono", value));
  }
  card.appendChild(dl);
  card.appendChild(
    el(
      "p",
      "hint",
      "Save this receipt. Anyone can find your block on the public chain by its index; only you can tie it to yourself.",
    ),
  );
  container.replaceChildren(card);
}

export function mountApp(root: HTMLElement, config: AppConfig): void {
  const { api, imageCount, candidates } = config;
  root.replaceChildren();

  const nav = el("nav", "tabs");
  const screens: Record<string, HTMLElement> = {};
  const tabNames = ["Register", "Vote", "Audit"] as const;
  for (const name of tabNames) {
    const button = el("button", "tab", name);
    button.type = "button";
    button.addEventListener("click", () => {
      for (const other of Object.values(screens)) other.hidden = true;
      screens[name]!.hidden = false;
    });
    nav.appendChild(button);
    screens[name] = el("section", "screen");
    screens[name]!.hidden = name !== "Register";
  }
  root.appendChild(nav);

  // --- Register -------------------------------------------------------------
  const reg = factorForm(imageCount, "Register");
  const regStatus = el("p", "status");
  regStatus.setAttribute("role", "status");
  const regResult = el("div", "result");
  reg.form.addEventListener("submit", (event) => {
    event.preventDefault();
    void (async () => {
      regStatus.textContent = "";
      try {
        const bIdentity = await registrationFlow(api, await reg.collect());
        const card = el("div", "identity-card");
        card.appendChild(el("h3", undefined, "Registered"));
        card.appendChild(el("p", undefined, "Save this identity digest; it is your credential:"));
        card.appendChild(el("code", "mono", bIdentity));
        regResult.replaceChildren(card);
        reg.reset();
      } catch (error) {
        regStatus.textContent = describeError(error);
      }
    })();
  });
  screens["Register"]!.append(el("h2", undefined, "Voter registration"), reg.form, regStatus, regResult);

  // --- Vote -----------------------------------------------------------------
  const login = factorForm(imageCount, "Log in");
  const voteStatus = el("p", "status");
  voteStatus.setAttribute("role", "status");
  const ballotBox = el("div", "ballot");
  const receiptBox = el("div", "result");
  let session: VoterSession | null = null;

  login.form.addEventListener("submit", (event) => {
    event.preventDefault();
    void (async () => {
      voteStatus.textContent = "";
      try {
        session = await loginFlow(api, await login.collect());
        login.reset();
        const list = el("div", "candidates");
        for (const candidate of candidates) {
          const choice = el("button", "candidate", candidate.displayName);
          choice.type = "button";
          choice.dataset.candidateId = candidate.candidateId;
          choice.addEventListener("click", () => {
            void (async () => {
              if (!session) return;
              voteStatus.textContent = "";
              try {
                const receipt = await ballotFlow(api, session, candidate.candidateId);
                session = null; // consumed by the successful ballot
                ballotBox.replaceChildren();
                renderReceipt(receiptBox, receipt);
              } catch (error) {
                voteStatus.textContent = describeError(error);
              }
            })();
          });
          list.appendChild(choice);
        }
        ballotBox.replaceChildren(el("h3", undefined, "Choose a candidate"), list);
      } catch (error) {
        voteStatus.textContent = describeError(error);
      }
    })();
  });
  screens["Vote"]!.append(el("h2", undefined, "Log in and vote"), login.form, voteStatus, ballotBox, receiptBox);

  // --- Audit ----------------------------------------------------------------
  const sections: AuditSections = {
    table: el("div", "audit-table"),
    charChart: el("div", "audit-chars"),
    bitChart: el("div", "audit-bits"),
    headline: el("div", "audit-headline"),
    status: el("p", "status"),
  };
  const controls = el("div", "audit-controls");
  const chainSelect = el("select");
  for (const name of ["registry", "votes"] as const) {
    const option = el("option", undefined, name);
    option.value = name;
    chainSelect.appendChild(option);
  }
  const adminInput = el("input");
  adminInput.type = "password";
  adminInput.placeholder = "admin token (optional, for headline metrics)";
  const refresh = el("button", "primary", "Load");
  refresh.type = "button";
  refresh.addEventListener("click", () => {
    void loadAuditView(
      api,
      sections,
      chainSelect.value as "registry" | "votes",
      adminInput.value || undefined,
    );
  });
  controls.append(chainSelect, adminInput, refresh);
  screens["Audit"]!.append(
    el("h2", undefined, "Public audit"),
    controls,
    sections.status,
    sections.table,
    sections.charChart,
    sections.bitChart,
    sections.headline,
  );

  for (const name of tabNames) root.appendChild(screens[name]!);
}

declare global {
  interface Window {
    BALLOTCHAIN_CONFIG?: { baseUrl?: string; imageCount?: number; candidates?: CandidateOption[] };
  }
}

// bootstrap only in a real page; tests mount explicitly
const rootElement = typeof document !== "undefined" ? document.getElementById("app") : null;
if (rootElement) {
  const pageConfig = window.BALLOTCHAIN_CONFIG ?? {};
  mountApp(rootElement, {
    api: new ApiClient(pageConfig.baseUrl ?? ""),
    imageCount: pageConfig.imageCount ?? 4,
    candidates: pageConfig.candidates ?? [],
  });
}
