/**
 * Interactive photo wall: a row of image tiles, each rotated in +90 degree
 * steps by clicking. The pattern is re-emitted after every click so the form
 * always holds a grammar-valid string.
 */

import { RotationWidgetState, clickImage, createWidgetState, emitPattern } from "./pattern.js";

export interface RotationWidget {
  element: HTMLElement;
  state: RotationWidgetState;
  pattern(): string;
  reset(): void;
}

export function mountRotationWidget(
  imageCount: number,
  onChange?: (pattern: string) => void,
): RotationWidget {
  const state = createWidgetState(imageCount);
  const element = document.createElement("div");
  element.className = "photo-wall";

  const tiles: HTMLButtonElement[] = [];
  for (let i = 0; i < imageCount; i++) {
    const tile = document.createElement("button");
    tile.type = "button";
    tile.className = "photo-tile";
    tile.dataset.index = String(i);
    tile.dataset.angle = "0";
    tile.setAttribute("aria-label", `image ${i + 1}, rotated 0 degrees`);
    tile.textContent = "▲"; // direction marker makes the rotation visible
    tile.addEventListener("click", () => {
      clickImage(state, i);
      paint(tile, i);
      onChange?.(emitPattern(state));
    });
    tiles.push(tile);
    element.appendChild(tile);
  }

  function paint(tile: HTMLButtonElement, i: number) {
    const angle = state.angles[i]!;
    tile.dataset.angle = String(angle);
    tile.style.transform = `rotate(${angle}deg)`;
    tile.setAttribute("aria-label", `image ${i + 1}, rotated ${angle} degrees`);
  }

  return {
    element,
    state,
    pattern: () => emitPattern(state),
    reset() {
      for (let i = 0; i < imageCount; i++) {
        state.angles[i] = 0;
        paint(tiles[i]!, i);
      }
      onChange?.(emitPattern(state));
    },
  };
}
