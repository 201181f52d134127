/**
 * Voter flows: registration, login, ballot.
 *
 * Factor material lives only in function arguments and local variables; the
 * session token is held in memory by the caller and nothing is ever written
 * to localStorage or sessionStorage.
 */

import {
  ApiClient,
  ApiError,
  MinutiaeTemplateJson,
  Receipt,
  RegisterRequest,
  bytesToBase64,
} from "./api.js";
import { parsePattern } from "./pattern.js";

export interface FactorInputs {
  idKind: "AADHAAR" | "DRIVING_LICENSE";
  documentBytes: Uint8Array;
  /** Raw scan bytes, or a pre-extracted minutiae template JSON upload. */
  fingerprint: { raw: Uint8Array } | { template: MinutiaeTemplateJson };
  pattern: string;
  imageCount: number;
}

export function buildRegisterRequest(factors: FactorInputs): RegisterRequest {
  // fail locally before any network trip if the widget state is impossible
  parsePattern(factors.pattern, factors.imageCount);
  return {
    id_kind: factors.idKind,
    id_document: bytesToBase64(factors.documentBytes),
    fingerprint:
      "raw" in factors.fingerprint
        ? bytesToBase64(factors.fingerprint.raw)
        : factors.fingerprint.template,
    pattern: factors.pattern,
  };
}

/** Enroll the voter; resolves to the b_identity credential to save offline. */
export async function registrationFlow(api: ApiClient, factors: FactorInputs): Promise<string> {
  const response = await api.register(buildRegisterRequest(factors));
  return response.b_identity;
}

export interface VoterSession {
  token: string;
  expiresAt: string;
}

/** Verify all three factors; resolves to an in-memory single-use session. */
export async function loginFlow(api: ApiClient, factors: FactorInputs): Promise<VoterSession> {
  const response = await api.login(buildRegisterRequest(factors));
  return { token: response.token, expiresAt: response.expires_at };
}

/** Cast the ballot; the session token is consumed by a successful vote. */
export async function ballotFlow(
  api: ApiClient,
  session: VoterSession,
  candidateId: string,
): Promise<Receipt> {
  const response = await api.vote(session.token, candidateId);
  return response.receipt;
}

/**
 * Factor-agnostic error copy. The service never says which factor failed and
 * neither do we; anything else would hand an attacker a confirmation oracle.
 */
export function describeError(error: unknown): string {
  if (error instanceof ApiError) {
    switch (error.status) {
      case 400:
        return "The submitted details could not be read. Check the files and pattern and try again.";
      case 401:
        return "Authentication failed. Check your document, fingerprint, and pattern, then try again.";
      case 409:
        return detailOf(error.body).includes("registered")
          ? "This identity is already registered."
          : "A ballot has already been recorded for this identity.";
      case 422:
        return "That candidate is not on the ballot.";
      case 503:
        return "The validators could not agree on this request. Nothing was recorded; try again.";
      default:
        return "The service rejected the request.";
    }
  }
  return "Could not reach the service.";
}

function detailOf(body: unknown): string {
  if (body && typeof body === "object" && "detail" in body) {
    const detail = (body as { detail: unknown }).detail;
    if (typeof detail === "string") return detail;
    if (detail && typeof detail === "object" && "message" in detail) {
      return String((detail as { message: unknown }).message);
    }
  }
  return "";
}
