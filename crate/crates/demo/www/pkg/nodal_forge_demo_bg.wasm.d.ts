/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_capsule_free: (a: number, b: number) => void;
export const capsule_critical_json: (a: number, b: number) => [number, number, number, number];
export const capsule_lambdas: (a: number) => [number, number];
export const capsule_mesh_json: (a: number) => [number, number];
export const capsule_new: (a: number, b: number, c: number, d: number) => [number, number, number];
export const capsule_nodal_json: (a: number, b: number) => [number, number, number, number];
export const capsule_targets: (a: number) => [number, number];
export const capsule_values: (a: number, b: number) => [number, number, number, number];
export const smoothing_profile: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
