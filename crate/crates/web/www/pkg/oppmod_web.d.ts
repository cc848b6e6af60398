/* tslint:disable */
/* eslint-disable */

export function archetypeNames(): string;

/**
 * `opponents` is a JSON array such as
 * `[{"kind":"uniform","lower":0,"upper":1},{"kind":"trunc_gauss","mu":0.4,"sigma":0.1}]`.
 */
export function bestResponseCurve(valuation: number, opponents: string, step: number): string;

export function runSealedBid(agents: number, episodes: number, seed: number): string;

export function simulateLob(ticks: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly archetypeNames: () => [number, number];
    readonly bestResponseCurve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly runSealedBid: (a: number, b: number, c: number) => [number, number, number, number];
    readonly simulateLob: (a: number, b: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
