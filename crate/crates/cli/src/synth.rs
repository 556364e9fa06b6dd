//! Seeded synthetic CSV data sets.

use std::fmt::Write as _;

use fragvmp::models::synthetic::{car_like_sample, gaussian_spline_sample, glm_sample, group_sample};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    /// Columns `power,log_price`.
    CarLike,
    /// Columns `x,y` with Gaussian noise of sd 0.1.
    Spline,
    /// Columns `x,y_binary,y_count`.
    Glm,
    /// Columns `subject,black,x,y`; `n` is the number of subjects with 20 rows each.
    Groups,
}

/// Seed and size of the bundled `data/car_like.csv`.
pub const BUNDLED_CAR_LIKE: (usize, u64) = (200, 2024);

pub fn synth_csv(kind: SynthKind, n: usize, seed: u64) -> String {
    let mut out = String::new();
    match kind {
        SynthKind::CarLike => {
            let s = car_like_sample(n, seed);
            out.push_str("power,log_price\n");
            for (x, y) in s.x.iter().zip(&s.y) {
                let _ = writeln!(out, "{x},{y}");
            }
        }
        SynthKind::Spline => {
            let s = gaussian_spline_sample(n, 0.1, seed);
            out.push_str("x,y\n");
            for (x, y) in s.x.iter().zip(&s.y) {
                let _ = writeln!(out, "{x},{y}");
            }
        }
        SynthKind::Glm => {
            let s = glm_sample(n, seed);
            out.push_str("x,y_binary,y_count\n");
            for i in 0..n {
                let _ = writeln!(out, "{},{},{}", s.x[i], s.y_binary[i], s.y_count[i]);
            }
        }
        SynthKind::Groups => {
            let s = group_sample(n, 20, seed);
            out.push_str("subject,black,x,y\n");
            for i in 0..s.x.len() {
                let _ = writeln!(out, "s{},{},{},{}", s.group_id[i], s.group_label[i], s.x[i], s.y[i]);
            }
        }
    }
    out
}
