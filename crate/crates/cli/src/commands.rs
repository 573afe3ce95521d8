//! Every subcommand except `run`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use successive_core::eval::{error_taxonomy, score_run, Prediction, RunMetadata};
use successive_core::generator::{
    corpus_stats, derive_training_splits, dynamic_sample, generate_examples, load_table, self_check, table_paths,
    EmissionMode, GeneratorConfig, QaExample, QdExample, SampleConfig, TemplateSet, TypePerformance,
};
use successive_core::retrieval::{
    build_qa_index_with, build_qd_index_with, vertex_cover_select, Embedder, EmbedderConfig, Precomputed, TfIdf,
};
use successive_core::{ComplexExample, ReasoningType};

use crate::io::{read_json, read_jsonl, write_json, write_jsonl, write_lines};
use crate::RunMeta;

pub const QD_INDEX_FILE: &str = "qd.idx";
pub const QA_INDEX_FILE: &str = "qa.idx";

pub struct GenerateArgs<'a> {
    pub tables: &'a Path,
    pub out: &'a Path,
    pub types: Vec<ReasoningType>,
    pub limit: usize,
    pub seed: u64,
    pub mode: EmissionMode,
    pub templates: Option<&'a Path>,
}

pub fn generate(args: GenerateArgs) -> Result<()> {
    let templates = match args.templates {
        Some(p) => TemplateSet::load(p)?,
        None => TemplateSet::builtin(),
    };
    let config = GeneratorConfig { limit_per_type: args.limit, seed: args.seed, mode: args.mode, ..Default::default() };
    let paths = table_paths(args.tables)?;
    if paths.is_empty() {
        bail!("no .csv or .tsv tables under {}", args.tables.display());
    }
    let per_table: Vec<Vec<ComplexExample>> = paths
        .par_iter()
        .map(|p| -> Result<Vec<ComplexExample>> {
            let table = load_table(p)?;
            let examples = generate_examples(&table, &args.types, &config, &templates)?;
            for e in &examples {
                let report = self_check(e, &table);
                if !report.passed {
                    bail!("{} failed self-check: {:?}", e.id, report);
                }
            }
            Ok(examples)
        })
        .collect::<Result<_>>()?;
    let corpus: Vec<ComplexExample> = per_table.into_iter().flatten().collect();
    write_jsonl(args.out, &corpus)?;
    eprintln!("{} examples from {} tables", corpus.len(), paths.len());
    Ok(())
}

pub struct SplitsArgs<'a> {
    pub corpus: &'a Path,
    pub qd: &'a Path,
    pub qa: &'a Path,
    pub dev_size: usize,
    pub dev: Option<&'a Path>,
    pub train: Option<&'a Path>,
    pub seed: u64,
}

/// Hold out a dev split, then derive the decomposition and answering
/// training sets from what remains.
pub fn splits(args: SplitsArgs) -> Result<()> {
    let mut corpus: Vec<ComplexExample> = read_jsonl(args.corpus)?;
    if args.dev_size > corpus.len() {
        bail!("dev size {} exceeds the corpus ({} examples)", args.dev_size, corpus.len());
    }
    if args.dev_size > 0 {
        corpus.shuffle(&mut ChaCha8Rng::seed_from_u64(args.seed));
    }
    let train = corpus.split_off(args.dev_size);
    let dev = corpus;
    match args.dev {
        Some(p) => write_jsonl(p, &dev)?,
        None if args.dev_size > 0 => bail!("--dev is required with a non-zero --dev-size"),
        None => {}
    }
    if let Some(p) = args.train {
        write_jsonl(p, &train)?;
    }
    let (qd, qa) = derive_training_splits(&train);
    write_jsonl(args.qd, &qd)?;
    write_jsonl(args.qa, &qa)?;
    eprintln!("{} dev, {} train -> {} decomposition, {} answering", dev.len(), train.len(), qd.len(), qa.len());
    Ok(())
}

fn embedder(vectors: Option<&Path>, fit: Vec<&str>) -> Result<EmbedderConfig> {
    Ok(match vectors {
        Some(p) => EmbedderConfig::Precomputed(Precomputed::load(p)?),
        None => EmbedderConfig::TfIdf(TfIdf::fit(fit)),
    })
}

pub fn index(qd: Option<&Path>, qa: Option<&Path>, out: &Path, vectors: Option<&Path>) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    if let Some(p) = qd {
        let examples: Vec<QdExample> = read_jsonl(p)?;
        let e = embedder(vectors, examples.iter().map(|x| x.question.as_str()).collect())?;
        let index = build_qd_index_with(&examples, e)?;
        index.save(&out.join(QD_INDEX_FILE))?;
        eprintln!("decomposition index: {} entries", index.len());
    }
    if let Some(p) = qa {
        let examples: Vec<QaExample> = read_jsonl(p)?;
        let e = embedder(vectors, examples.iter().map(|x| x.question.surface()).collect())?;
        let index = build_qa_index_with(&examples, e)?;
        index.save(&out.join(QA_INDEX_FILE))?;
        eprintln!("answering index: {} entries", index.len());
    }
    Ok(())
}

/// Ids of a vertex cover over the k-nearest-neighbour graph of the complex
/// questions, topped up to `target`.
pub fn select_examples(corpus: &Path, k: usize, target: usize, out: Option<&Path>) -> Result<()> {
    let corpus: Vec<ComplexExample> = read_jsonl(corpus)?;
    let tfidf = TfIdf::fit(corpus.iter().map(|e| e.question.as_str()));
    let vectors = corpus.iter().map(|e| tfidf.embed(&e.question)).collect::<Result<Vec<_>, _>>()?;
    let chosen = vertex_cover_select(&vectors, k, target);
    write_lines(out, &chosen.iter().map(|&i| corpus[i].id.clone()).collect::<Vec<_>>())
}

pub struct EvalArgs<'a> {
    pub pred: &'a Path,
    pub gold: &'a Path,
    pub report: &'a Path,
    pub run_meta: Option<&'a Path>,
    pub taxonomy: Option<&'a Path>,
    pub sample: usize,
    pub seed: u64,
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let predictions: Vec<Prediction> = read_jsonl(args.pred)?;
    let gold: Vec<ComplexExample> = read_jsonl(args.gold)?;
    let metadata = match args.run_meta {
        Some(p) => {
            let meta: RunMeta = read_json(p)?;
            RunMetadata { config_hash: Some(meta.config_hash), backend: Some(meta.backend) }
        }
        None => RunMetadata::default(),
    };
    let report = score_run(&predictions, &gold, metadata)?;
    write_json(args.report, &report)?;
    println!("{:<20} {:>7} {:>7} {:>6}", "type", "F1", "EM", "n");
    for (t, s) in &report.per_type {
        println!("{t:<20} {:>7.2} {:>7.2} {:>6}", s.f1, s.em, s.count);
    }
    println!("{:<20} {:>7.2} {:>7.2} {:>6}", "overall", report.f1, report.em, report.count);
    if report.approximate > 0 {
        println!("{} predictions scored with greedy span alignment", report.approximate);
    }
    if let Some(p) = args.taxonomy {
        let errors = error_taxonomy(&predictions, &gold, args.sample, args.seed);
        write_json(p, &errors)?;
        eprintln!("{} errors, {} sampled", errors.total_errors, errors.sample.len());
    }
    Ok(())
}

pub struct SampleArgs<'a> {
    pub perf: &'a Path,
    pub corpus: &'a Path,
    pub budget: usize,
    pub first_epoch: bool,
    pub config: SampleConfig,
    pub out: Option<&'a Path>,
}

/// Reallocate the next epoch's budget across reasoning types and print the
/// sampled ids, one per line; the allocation goes to stderr.
pub fn sample(args: SampleArgs) -> Result<()> {
    let perf: Vec<TypePerformance> = read_json(args.perf)?;
    let corpus: Vec<ComplexExample> = read_jsonl(args.corpus)?;
    let mut pools: BTreeMap<ReasoningType, Vec<String>> = BTreeMap::new();
    for e in corpus {
        if let Some(t) = e.reasoning_type {
            pools.entry(t).or_default().push(e.id);
        }
    }
    let outcome = dynamic_sample(&pools, &perf, args.budget, args.first_epoch, &args.config)?;
    for (t, n) in &outcome.allocation {
        eprintln!("{t:<20} {n:>8}");
    }
    write_lines(args.out, &outcome.ids)
}

pub fn stats(corpus: &Path) -> Result<()> {
    let corpus: Vec<ComplexExample> = read_jsonl(corpus)?;
    print!("{}", corpus_stats(&corpus).render());
    Ok(())
}


pub fn index_path(dir: &Path, file: &str) -> Option<PathBuf> {
    let p = dir.join(file);
    p.exists().then_some(p)
}
