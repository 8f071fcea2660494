/**
 * Session sync state: which model version the UI holds and whether the
 * model changed underneath it.
 *
 * A version conflict is terminal for the held snapshot: the banner stays
 * up until the user reloads. Writes are never retried automatically.
 */

import { VersionConflictError } from "./api.js";

export interface SyncState {
  /** Model version every write is conditioned on. */
  heldVersion: number;
  /** True once a write was rejected because the model moved on. */
  bannerVisible: boolean;
  /** Server-side version reported by the conflict, for the banner text. */
  serverVersion: number | null;
}

export function initialSync(version: number): SyncState {
  return { heldVersion: version, bannerVisible: false, serverVersion: null };
}

/** Acknowledged write or fresh fetch: adopt the server's version. */
export function syncAdvanced(state: SyncState, version: number): SyncState {
  return { heldVersion: version, bannerVisible: state.bannerVisible, serverVersion: state.serverVersion };
}

/**
 * Classify a write failure. Conflicts raise the banner and freeze the
 * session; other errors surface to the dialog that issued the write.
 */
export function syncAfterWriteError(state: SyncState, error: unknown): SyncState {
  if (error instanceof VersionConflictError) {
    return {
      heldVersion: state.heldVersion,
      bannerVisible: true,
      serverVersion: error.actual,
    };
  }
  return state;
}

export function bannerText(state: SyncState): string {
  const suffix =
    state.serverVersion !== null
      ? ` (you hold version ${state.heldVersion}, the model is at ${state.serverVersion})`
      : "";
  return `model changed — reload${suffix}`;
}
