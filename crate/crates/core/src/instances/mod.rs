//! Deterministic instance families and problem/report files.

mod generate;
mod io;
mod prng;

pub use generate::{
    generate_block_triangular, generate_random_mbt, generate_scalar, lower_left_block,
    random_mbt_critical_lambda, raw_random_tensor, Family, GeneratorSpec,
};
pub use io::{
    load_problem, load_report, problem_from_json, problem_to_json, report_to_json, save_problem,
    save_report,
};
pub use prng::Prng;
