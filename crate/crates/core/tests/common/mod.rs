#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use successive_core::generator::{generate_examples, load_table, table_paths, GeneratorConfig, TemplateSet};
use successive_core::{ComplexExample, ReasoningType, Table};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/tables")
}

pub fn fixture_tables() -> Vec<Table> {
    table_paths(&fixture_dir()).unwrap().iter().map(|p| load_table(p).unwrap()).collect()
}

pub fn corpus(tables: &[Table], limit_per_type: usize) -> Vec<ComplexExample> {
    let config = GeneratorConfig { limit_per_type, ..Default::default() };
    let templates = TemplateSet::builtin();
    tables.iter().flat_map(|t| generate_examples(t, &ReasoningType::ALL, &config, &templates).unwrap()).collect()
}

const PLAYERS: [&str; 16] = [
    "Ortiz", "Keller", "Nakamura", "Adeyemi", "Brennan", "Costa", "Duval", "Eriksen", "Fischer", "Garrido", "Haddad",
    "Ivanova", "Jensen", "Kowalski", "Laurent", "Moreau",
];
const TEAMS: [&str; 5] = ["Rovers", "United", "Athletic", "City", "Wanderers"];
const VENUES: [&str; 3] = ["Home", "Away", "Neutral"];
const MONTHS: [&str; 12] = ["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"];

fn thousands(n: u32) -> String {
    let s = n.to_string();
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        if i > 0 && (s.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

/// A small sports-style table with text, date and numeric columns, sometimes
/// a percentage column.
pub fn random_table(seed: u64) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = rng.random_range(4..=8);
    let mut players: Vec<&str> = PLAYERS.to_vec();
    for i in (1..players.len()).rev() {
        players.swap(i, rng.random_range(0..=i));
    }
    let with_share = rng.random_bool(0.4);
    let mut headers: Vec<String> = ["Player", "Team", "Venue", "Date", "Goals", "Attendance"].map(String::from).to_vec();
    if with_share {
        headers.push("Possession %".into());
    }
    let teams = &TEAMS[..rng.random_range(2..=TEAMS.len())];
    let body: Vec<Vec<String>> = (0..rows)
        .map(|r| {
            let mut row = vec![
                players[r].to_string(),
                teams.choose(&mut rng).unwrap().to_string(),
                VENUES.choose(&mut rng).unwrap().to_string(),
                format!("{} {} {}", rng.random_range(1..=28), MONTHS.choose(&mut rng).unwrap(), rng.random_range(1995..=2005)),
                rng.random_range(0..40).to_string(),
                thousands(rng.random_range(800..60_000)),
            ];
            if with_share {
                row.push(rng.random_range(20..80).to_string());
            }
            row
        })
        .collect();
    Table::infer(format!("rand{seed}"), headers, body).unwrap()
}
