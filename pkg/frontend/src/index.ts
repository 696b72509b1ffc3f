export * from "./types.js";
export * from "./api.js";
export * from "./viewmodel.js";
export * from "./console.js";
