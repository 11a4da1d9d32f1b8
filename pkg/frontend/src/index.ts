export * from "./bigfloat";
export * from "./matfile";
export * from "./ffi";
export * from "./wrapper";
