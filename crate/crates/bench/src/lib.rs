//! Deterministic inputs shared by the benchmarks.

use successive_core::generator::{generate_examples, GeneratorConfig, TemplateSet};
use successive_core::{ComplexExample, ReasoningType, Table};

const PLAYERS: [&str; 12] =
    ["Ortiz", "Keller", "Nakamura", "Adeyemi", "Brennan", "Costa", "Duval", "Eriksen", "Fischer", "Garrido", "Haddad", "Moreau"];
const TEAMS: [&str; 4] = ["Rovers", "United", "Athletic", "City"];
const MONTHS: [&str; 6] = ["Jan", "Mar", "May", "Jul", "Sep", "Nov"];

/// A match table whose contents vary with `seed` without needing an RNG.
pub fn table(seed: usize, rows: usize) -> Table {
    let headers = ["Player", "Team", "Date", "Goals", "Attendance"].map(String::from).to_vec();
    let body = (0..rows)
        .map(|r| {
            let k = seed * 31 + r * 17;
            vec![
                PLAYERS[(seed + r) % PLAYERS.len()].to_string(),
                TEAMS[k % TEAMS.len()].to_string(),
                format!("{} {} {}", 1 + k % 28, MONTHS[k % MONTHS.len()], 1990 + k % 15),
                (k % 37).to_string(),
                (1000 + (k * 7919) % 50_000).to_string(),
            ]
        })
        .collect();
    Table::infer(format!("bench{seed}"), headers, body).expect("well-formed bench table")
}

/// Generated examples over `tables` tables of eight rows each.
pub fn corpus(tables: usize, limit_per_type: usize) -> Vec<ComplexExample> {
    let config = GeneratorConfig { limit_per_type, ..Default::default() };
    let templates = TemplateSet::builtin();
    (0..tables)
        .flat_map(|s| generate_examples(&table(s, rows_for(s)), &ReasoningType::ALL, &config, &templates).expect("builtin templates"))
        .collect()
}

fn rows_for(seed: usize) -> usize {
    6 + seed % 4
}
