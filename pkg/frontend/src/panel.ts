/** Filter panel: code checkboxes, length bounds, aggregation level,
 * color encoding, layer toggles, export button, error banner.
 *
 * The panel only reports intents; the dashboard owns the state.
 */

import { MetaResponse } from "./api.js";
import { ENCODINGS, Encoding } from "./colors.js";
import { LayerVisibility, ViewState } from "./state.js";

export interface PanelCallbacks {
  onToggleCode(kind: "species" | "sex" | "types" | "nations", code: string, on: boolean): void;
  onLengthRange(minFt: number | null, maxFt: number | null): void;
  onLevel(level: number): void;
  onEncoding(encoding: Encoding): void;
  onLayer(layer: keyof LayerVisibility, on: boolean): void;
  onExport(): void;
  onClearDates(): void;
}

export interface Panel {
  readonly root: HTMLElement;
  renderCodes(meta: MetaResponse): void;
  reflect(state: ViewState): void;
  showError(message: string): void;
  clearError(): void;
  setCounts(filtered: number, total: number): void;
}

function section(title: string, cls: string): [HTMLElement, HTMLElement] {
  const box = document.createElement("fieldset");
  box.className = cls;
  const legend = document.createElement("legend");
  legend.textContent = title;
  box.appendChild(legend);
  const body = document.createElement("div");
  box.appendChild(body);
  return [box, body];
}

export function createPanel(cb: PanelCallbacks): Panel {
  const root = document.createElement("div");
  root.className = "wt-panel";

  const banner = document.createElement("div");
  banner.className = "error-banner";
  banner.setAttribute("role", "alert");
  banner.hidden = true;
  root.appendChild(banner);

  const counts = document.createElement("p");
  counts.className = "counts";
  root.appendChild(counts);

  const [codesBox, codesBody] = section("Filters", "codes");
  root.appendChild(codesBox);

  const [lengthBox, lengthBody] = section("Length (ft)", "lengths");
  const lmin = document.createElement("input");
  lmin.type = "number";
  lmin.name = "lmin";
  const lmax = document.createElement("input");
  lmax.type = "number";
  lmax.name = "lmax";
  const lengthApply = document.createElement("button");
  lengthApply.textContent = "apply";
  lengthApply.addEventListener("click", () => {
    cb.onLengthRange(
      lmin.value === "" ? null : Number(lmin.value),
      lmax.value === "" ? null : Number(lmax.value),
    );
  });
  lengthBody.appendChild(lmin);
  lengthBody.appendChild(lmax);
  lengthBody.appendChild(lengthApply);
  root.appendChild(lengthBox);

  const [viewBox, viewBody] = section("View", "view");
  const levelSelect = document.createElement("select");
  levelSelect.name = "level";
  for (const lvl of [0, 1, 2, 3]) {
    const opt = document.createElement("option");
    opt.value = String(lvl);
    opt.textContent = lvl === 0 ? "raw points" : `level ${lvl}`;
    levelSelect.appendChild(opt);
  }
  levelSelect.addEventListener("change", () => cb.onLevel(Number(levelSelect.value)));
  viewBody.appendChild(levelSelect);

  const encodingSelect = document.createElement("select");
  encodingSelect.name = "encoding";
  for (const enc of ENCODINGS) {
    const opt = document.createElement("option");
    opt.value = enc;
    opt.textContent = enc;
    encodingSelect.appendChild(opt);
  }
  encodingSelect.addEventListener("change", () =>
    cb.onEncoding(encodingSelect.value as Encoding),
  );
  viewBody.appendChild(encodingSelect);

  const layerChecks = new Map<keyof LayerVisibility, HTMLInputElement>();
  for (const layer of ["points", "heatmap", "routes", "effort", "cpue"] as const) {
    const label = document.createElement("label");
    const check = document.createElement("input");
    check.type = "checkbox";
    check.name = `layer-${layer}`;
    check.addEventListener("change", () => cb.onLayer(layer, check.checked));
    label.appendChild(check);
    label.appendChild(document.createTextNode(layer));
    viewBody.appendChild(label);
    layerChecks.set(layer, check);
  }
  root.appendChild(viewBox);

  const clearDates = document.createElement("button");
  clearDates.textContent = "clear date brush";
  clearDates.className = "clear-dates";
  clearDates.addEventListener("click", () => cb.onClearDates());
  root.appendChild(clearDates);

  const exportButton = document.createElement("button");
  exportButton.textContent = "export CSV";
  exportButton.className = "export";
  exportButton.addEventListener("click", () => cb.onExport());
  root.appendChild(exportButton);

  const codeChecks = new Map<string, HTMLInputElement>();

  function codeGroup(
    title: string,
    kind: "species" | "sex" | "types" | "nations",
    codes: string[],
  ): HTMLElement {
    const group = document.createElement("div");
    group.className = `code-group ${kind}`;
    const heading = document.createElement("h4");
    heading.textContent = title;
    group.appendChild(heading);
    for (const code of codes) {
      const label = document.createElement("label");
      const check = document.createElement("input");
      check.type = "checkbox";
      check.name = `${kind}-${code}`;
      check.addEventListener("change", () => cb.onToggleCode(kind, code, check.checked));
      label.appendChild(check);
      label.appendChild(document.createTextNode(code));
      group.appendChild(label);
      codeChecks.set(`${kind}:${code}`, check);
    }
    return group;
  }

  return {
    root,
    renderCodes(meta) {
      while (codesBody.firstChild) codesBody.removeChild(codesBody.firstChild);
      codeChecks.clear();
      codesBody.appendChild(codeGroup("Species", "species", meta.codes.species));
      codesBody.appendChild(codeGroup("Sex", "sex", meta.codes.sexes));
      codesBody.appendChild(codeGroup("Type", "types", meta.codes.types));
      codesBody.appendChild(codeGroup("Nation", "nations", meta.codes.nations));
    },
    reflect(state) {
      for (const [key, check] of codeChecks) {
        const [kind, code] = key.split(":", 2);
        const set = state.filter[kind as "species" | "sex" | "types" | "nations"];
        check.checked = set.has(code);
      }
      levelSelect.value = String(state.level);
      encodingSelect.value = state.encoding;
      for (const [layer, check] of layerChecks) check.checked = state.layers[layer];
      lmin.value = state.filter.lengthMinFt === null ? "" : String(state.filter.lengthMinFt);
      lmax.value = state.filter.lengthMaxFt === null ? "" : String(state.filter.lengthMaxFt);
    },
    showError(message) {
      banner.textContent = message;
      banner.hidden = false;
    },
    clearError() {
      banner.textContent = "";
      banner.hidden = true;
    },
    setCounts(filtered, total) {
      counts.textContent = `${filtered.toLocaleString()} of ${total.toLocaleString()} records`;
      counts.setAttribute("data-filtered", String(filtered));
      counts.setAttribute("data-total", String(total));
    },
  };
}
