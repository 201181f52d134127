/**
 * Photo rotation pattern: widget state and the strict grammar.
 *
 * The server is the authority on this grammar; this module mirrors it so the
 * widget can only ever emit strings the server will accept, and so malformed
 * strings never leave the client silently.
 */

export const ALLOWED_ANGLES = [0, 90, 180, 270] as const;
export type Angle = (typeof ALLOWED_ANGLES)[number];

const IMAGE_PREFIX = "PhotoWall";

export interface RotationWidgetState {
  /** Current angle per image slot; every slot starts at 0. */
  angles: Angle[];
}

export function createWidgetState(imageCount: number): RotationWidgetState {
  if (!Number.isInteger(imageCount) || imageCount < 1) {
    throw new Error(`image count must be a positive integer, got ${imageCount}`);
  }
  return { angles: Array.from({ length: imageCount }, () => 0 as Angle) };
}

/** One click rotates the targeted image by exactly +90 degrees modulo 360. */
export function clickImage(state: RotationWidgetState, index: number): void {
  const current = state.angles[index];
  if (current === undefined) {
    throw new Error(`no image at index ${index}`);
  }
  state.angles[index] = ((current + 90) % 360) as Angle;
}

/** Serialize the current widget state into the pattern grammar. */
export function emitPattern(state: RotationWidgetState): string {
  return state.angles.map((angle, i) => `${IMAGE_PREFIX}${i + 1}_${angle}`).join("_");
}

/**
 * Strict parse of a pattern string: indices must run 1..imageCount in order
 * and every angle must be one of 0/90/180/270, with no padding or casing
 * slack. Throws on anything else.
 */
export function parsePattern(pattern: string, imageCount: number): Angle[] {
  if (!Number.isInteger(imageCount) || imageCount < 1) {
    throw new Error(`image count must be a positive integer, got ${imageCount}`);
  }
  const tokens = pattern.split("_");
  if (tokens.length !== imageCount * 2) {
    throw new Error(
      `expected ${imageCount * 2} tokens for ${imageCount} images, got ${tokens.length}`,
    );
  }
  const angles: Angle[] = [];
  for (let i = 0; i < imageCount; i++) {
    const name = tokens[2 * i]!;
    const angleToken = tokens[2 * i + 1]!;
    if (name !== `${IMAGE_PREFIX}${i + 1}`) {
      throw new Error(`bad token '${name}': expected '${IMAGE_PREFIX}${i + 1}'`);
    }
    // reject padding and signs before numeric conversion ("090", "+90", "")
    if (!/^(0|[1-9][0-9]*)$/.test(angleToken)) {
      throw new Error(`bad token '${angleToken}': angle must be one of 0, 90, 180, 270`);
    }
    const angle = Number(angleToken);
    if (!(ALLOWED_ANGLES as readonly number[]).includes(angle)) {
      throw new Error(`bad token '${angleToken}': angle must be one of 0, 90, 180, 270`);
    }
    angles.push(angle as Angle);
  }
  return angles;
}
