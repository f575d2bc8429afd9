//! Criterion benchmarks for the sampler, the cut LP and the Gibbs
//! simulator. Run with `cargo bench -p isingsis-bench`.
