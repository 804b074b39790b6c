/* tslint:disable */
/* eslint-disable */

export class Capsule {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * PL critical points of `u_k` with their Morse index.
     */
    critical_json(k: number): string;
    lambdas(): Float64Array;
    mesh_json(): string;
    /**
     * Solves the lowest eigenpairs of the capsule with collar radius `r`
     * under the degenerate metric `g_eps`.
     */
    constructor(eps: number, r: number, layers: number, refinement: number);
    /**
     * Zero set of `u_k` as 3D segments, with component labels and the
     * nodal domain count.
     */
    nodal_json(k: number): string;
    /**
     * Collar Neumann eigenvalues `(k pi / 2)^2`, the `eps -> 0` limits.
     */
    targets(): Float64Array;
    values(k: number): Float64Array;
}

export function smoothing_profile(eps: number, delta: number, order: number, samples: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_capsule_free: (a: number, b: number) => void;
    readonly capsule_critical_json: (a: number, b: number) => [number, number, number, number];
    readonly capsule_lambdas: (a: number) => [number, number];
    readonly capsule_mesh_json: (a: number) => [number, number];
    readonly capsule_new: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly capsule_nodal_json: (a: number, b: number) => [number, number, number, number];
    readonly capsule_targets: (a: number) => [number, number];
    readonly capsule_values: (a: number, b: number) => [number, number, number, number];
    readonly smoothing_profile: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
