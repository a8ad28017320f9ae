use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use layercode::analysis::{
    decoder_barrier_test, distance_fraction_test, energy_barrier_search, exact_tail_log,
    replay_path, replay_sequence, AnalysisError, BarrierProblem, BarrierTarget, BoundParams,
    BoundRow,
};
use layercode::code::{CssCode, ExactCosetDecoder};
use layercode::decoder::{DecodeError, Decoder};
use layercode::gf2::BitVec;
use layercode::lattice::{
    build_layer_code, extract_syndrome, logical_action, read_lattice, validate_lattice,
    write_lattice, LatticeError, LatticeSyndrome, LayerKind, LayerLattice,
};
use layercode::pauli::{PauliError, PauliKind};
use layercode::thermal::{derive_seed, estimate_memory_time};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{BarrierOn, Loaded};
use crate::output::{write_text, JsonLines, Tagged};
use crate::CliError;

fn lattice_from(loaded: &Loaded, code: &CssCode) -> Result<LayerLattice, CliError> {
    let c = &loaded.config;
    build_layer_code(code, c.surface_scale, c.extended).map_err(|e| match e {
        LatticeError::InvalidScale(_) | LatticeError::EmptyCode => CliError::Config(e.to_string()),
        other => CliError::Failed(other.to_string()),
    })
}

fn kind_from(name: &str) -> Result<PauliKind, CliError> {
    match name {
        "x" | "X" => Ok(PauliKind::X),
        "z" | "Z" => Ok(PauliKind::Z),
        other => Err(CliError::Config(format!("unknown Pauli kind `{other}`"))),
    }
}

pub fn build(config: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let loaded = Loaded::load(config, seed, false)?;
    let code = loaded.code()?;
    let lat = lattice_from(&loaded, &code)?;
    let report = validate_lattice(&lat, code.k);
    let degree = lat.checks.x_checks_of.max_row_weight() + lat.checks.z_checks_of.max_row_weight();
    println!(
        "grey={} blue={} red={} k={}",
        lat.layer_ids(LayerKind::Grey).len(),
        lat.layer_ids(LayerKind::Blue).len(),
        lat.layer_ids(LayerKind::Red).len(),
        report
            .k
            .map_or_else(|| "skipped".to_string(), |k| k.to_string())
    );
    println!(
        "qubits={} x_checks={} z_checks={} N={} L={} max_check_weight={} max_qubit_degree={} max_extent_half={}",
        report.qubits,
        report.x_checks,
        report.z_checks,
        lat.check_count(),
        lat.linear_size(),
        report.max_check_weight,
        degree,
        report.max_check_extent_half
    );
    let out = loaded.output_dir()?;
    write_text(&out.join("lattice.txt"), &write_lattice(&lat))?;
    let mut json = JsonLines::create(&out.join("build.json"))?;
    json.write(&Tagged {
        config_hash: &loaded.hash,
        master_seed: loaded.master_seed,
        record: &report,
    })?;
    if report.passed() {
        println!("validation=ok");
        Ok(())
    } else {
        for v in &report.violations {
            println!("violation {v}");
        }
        Err(CliError::Failed(format!(
            "{} validation violations",
            report.violations.len()
        )))
    }
}

/// An error file (`x`/`z` lines of qubit indices) or a syndrome file (`m`/`e` lines of check indices).
enum DecodeInput {
    Error(PauliError),
    Syndrome(LatticeSyndrome),
}

fn parse_decode_input(text: &str, lat: &LayerLattice) -> Result<DecodeInput, CliError> {
    let n = lat.num_qubits();
    let mut error = PauliError::identity(n);
    let mut syndrome = LatticeSyndrome::empty(lat);
    let (mut has_error, mut has_syndrome) = (false, false);
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        let mut tokens = line.split_whitespace();
        let Some(tag) = tokens.next() else { continue };
        let bad = |msg: String| CliError::Config(format!("line {}: {msg}", i + 1));
        let indices = tokens
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| bad(format!("`{t}` is not an index")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let (target, limit, is_error): (&mut dyn FnMut(usize), usize, bool) = match tag {
            "x" => (&mut |q| error.flip(q, PauliKind::X), n, true),
            "z" => (&mut |q| error.flip(q, PauliKind::Z), n, true),
            "m" => (&mut |c| syndrome.m_lit.toggle(c), lat.num_z_checks(), false),
            "e" => (&mut |c| syndrome.e_lit.toggle(c), lat.num_x_checks(), false),
            other => return Err(bad(format!("unknown tag `{other}`"))),
        };
        if let Some(&i) = indices.iter().find(|&&i| i >= limit) {
            return Err(bad(format!("index {i} out of range")));
        }
        indices.into_iter().for_each(target);
        has_error |= is_error;
        has_syndrome |= !is_error;
    }
    match (has_error, has_syndrome) {
        (true, true) => Err(CliError::Config(
            "file mixes error and syndrome lines".into(),
        )),
        (true, false) => Ok(DecodeInput::Error(error)),
        _ => Ok(DecodeInput::Syndrome(syndrome)),
    }
}

fn support_line(label: &str, v: &BitVec) -> String {
    let idx: Vec<String> = v.ones().map(|i| i.to_string()).collect();
    if idx.is_empty() {
        label.to_string()
    } else {
        format!("{label} {}", idx.join(" "))
    }
}

pub fn decode(lattice: &Path, input: &Path, audit: bool) -> Result<(), CliError> {
    let text = fs::read_to_string(lattice)
        .map_err(|e| CliError::Config(format!("{}: {e}", lattice.display())))?;
    let lat = read_lattice(&text).map_err(|e| CliError::Config(e.to_string()))?;
    let text = fs::read_to_string(input)
        .map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
    let parsed = parse_decode_input(&text, &lat)?;
    let syndrome = match &parsed {
        DecodeInput::Error(e) => extract_syndrome(&lat, e),
        DecodeInput::Syndrome(s) => s.clone(),
    };
    let mut dec = Decoder::new(&lat);
    dec.audit = audit;
    let input_decoder = ExactCosetDecoder::default();
    let mut correction = PauliError::identity(lat.num_qubits());
    for (kind, lit) in [
        (PauliKind::X, &syndrome.m_lit),
        (PauliKind::Z, &syndrome.e_lit),
    ] {
        let report = dec.decode(kind, lit, &input_decoder).map_err(|e| match e {
            DecodeError::InvalidSyndrome { violated, sigma } => CliError::Decode(format!(
                "{kind:?} syndrome violates meta-checks {violated:?} (input syndrome {})",
                sigma.to_bit_string()
            )),
            other => CliError::Decode(other.to_string()),
        })?;
        println!("[{}]", kind.symbol().to_ascii_lowercase());
        for line in &report.transcript {
            println!("{line}");
        }
        correction.mul_assign(&report.correction);
    }
    println!("{}", support_line("correction x", &correction.x_support));
    println!("{}", support_line("correction z", &correction.z_support));
    if let DecodeInput::Error(e) = parsed {
        let mut total = e;
        total.mul_assign(&correction);
        let residual = extract_syndrome(&lat, &total);
        let trivial = logical_action(&lat, &total).is_ok_and(|a| a.iter().all(|c| c.is_trivial()));
        println!(
            "residual syndrome={} logical={}",
            residual.m_lit.weight() + residual.e_lit.weight(),
            if trivial { "trivial" } else { "nontrivial" }
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct SampleRecord {
    sample: usize,
    seed: u64,
    weight: usize,
    success: bool,
}

pub fn sample(config: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let loaded = Loaded::load(config, seed, true)?;
    let block = loaded
        .config
        .sample
        .as_ref()
        .ok_or_else(|| CliError::Config("config has no [sample] block".into()))?;
    if !(0.0..=1.0).contains(&block.p) {
        return Err(CliError::Config(format!(
            "p = {} is not a probability",
            block.p
        )));
    }
    let code = loaded.code()?;
    let lat = lattice_from(&loaded, &code)?;
    let dec = Decoder::new(&lat);
    let input = ExactCosetDecoder::default();
    let records: Vec<SampleRecord> = (0..block.samples)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(loaded.master_seed, 0, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut e = PauliError::identity(lat.num_qubits());
            for q in 0..lat.num_qubits() {
                for kind in [PauliKind::X, PauliKind::Z] {
                    if rng.gen_bool(block.p) {
                        e.flip(q, kind);
                    }
                }
            }
            let success = layercode::decoder::recovery_map_check(&dec, &e, &input);
            SampleRecord {
                sample: i,
                seed,
                weight: e.weight(),
                success,
            }
        })
        .collect();
    let out = loaded.output_dir()?;
    let mut lines = JsonLines::create(&out.join("samples.jsonl"))?;
    for r in &records {
        lines.write(&Tagged {
            config_hash: &loaded.hash,
            master_seed: loaded.master_seed,
            record: r,
        })?;
    }
    let ok = records.iter().filter(|r| r.success).count();
    println!(
        "samples={} successes={ok} success_fraction={:.6}",
        records.len(),
        ok as f64 / records.len().max(1) as f64
    );
    Ok(())
}

pub fn thermal(config: &Path, seed: Option<u64>, dry_run: bool) -> Result<(), CliError> {
    let loaded = Loaded::load(config, seed, true)?;
    let block = loaded
        .config
        .thermal
        .as_ref()
        .ok_or_else(|| CliError::Config("config has no [thermal] block".into()))?;
    let exp = block.experiment(loaded.master_seed)?;
    let code = loaded.code()?;
    let lat = lattice_from(&loaded, &code)?;
    println!(
        "plan qubits={} L={} betas={:?} trajectories={} checkpoints={} max_records={} master_seed={} config_hash={}",
        lat.num_qubits(),
        lat.linear_size(),
        exp.betas,
        exp.trajectories,
        exp.schedule.len(),
        exp.betas.len() * exp.trajectories * exp.schedule.len(),
        loaded.master_seed,
        loaded.hash
    );
    if dry_run {
        return Ok(());
    }
    let out = loaded.output_dir()?;
    let mut lines = JsonLines::create(&out.join("records.jsonl"))?;
    let mut write_error = None;
    let cells = estimate_memory_time(&lat, &exp, &ExactCosetDecoder::default(), |r| {
        if write_error.is_none() {
            write_error = lines
                .write(&Tagged {
                    config_hash: &loaded.hash,
                    master_seed: loaded.master_seed,
                    record: r,
                })
                .err();
        }
    })
    .map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(e) = write_error {
        return Err(e);
    }
    let mut csv = String::from("beta,L,trajectories,t_mem,ci_low,ci_high,censored\n");
    println!(
        "{:>8} {:>4} {:>6} {:>12} {:>25}",
        "beta", "L", "traj", "T_mem", "90% CI"
    );
    for c in &cells {
        let t = c
            .t_mem
            .map_or_else(|| "censored".to_string(), |t| format!("{t:.6}"));
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            c.beta,
            c.linear_size,
            c.trajectories,
            c.t_mem.map_or_else(String::new, |t| t.to_string()),
            c.ci.0,
            c.ci.1,
            c.censored
        ));
        println!(
            "{:>8} {:>4} {:>6} {:>12} {:>25}",
            c.beta,
            c.linear_size,
            c.trajectories,
            t,
            format!("[{:.6}, {:.6}]", c.ci.0, c.ci.1)
        );
    }
    write_text(&out.join("summary.csv"), &csv)
}

#[derive(Serialize)]
struct WitnessRecord {
    max_penalty: usize,
    decoded: bool,
}

pub fn barrier(config: &Path, seed: Option<u64>, budget: Option<u64>) -> Result<(), CliError> {
    let loaded = Loaded::load(config, seed, true)?;
    let block = loaded
        .config
        .barrier
        .as_ref()
        .ok_or_else(|| CliError::Config("config has no [barrier] block".into()))?;
    let kind = kind_from(&block.kind)?;
    let target = block
        .class
        .map_or(BarrierTarget::AnyNontrivial, BarrierTarget::Class);
    let mode = block.search_mode(budget);
    let code = loaded.code()?;
    let lat = match block.on {
        BarrierOn::Lattice => Some(lattice_from(&loaded, &code)?),
        BarrierOn::Code => None,
    };
    let code_checks = code.check_matrices();
    let problem = match &lat {
        Some(l) => BarrierProblem::for_lattice(l, kind),
        None => BarrierProblem::for_code(&code_checks, &code, kind),
    };
    let result = energy_barrier_search(&problem, target, mode).map_err(|e| match e {
        AnalysisError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
        other => CliError::Failed(other.to_string()),
    })?;
    let (replayed, _) = replay_path(problem.checks, kind, &result.path);
    println!(
        "barrier={} exhaustive={} states={} path_len={} replayed_max={replayed}",
        result.barrier,
        result.exhaustive,
        result.states,
        result.path.len()
    );
    let out = loaded.output_dir()?;
    let tag = |record| Tagged {
        config_hash: &loaded.hash,
        master_seed: loaded.master_seed,
        record,
    };
    JsonLines::create(&out.join("barrier.json"))?
        .write(&tag(serde_json::to_value(&result).unwrap()))?;
    if block.walk.is_none() && block.distance.is_none() {
        return Ok(());
    }
    let lat = lat.ok_or_else(|| {
        CliError::Config("walk and distance tests need `on = \"lattice\"`".into())
    })?;
    let dec = Decoder::new(&lat);
    let input = ExactCosetDecoder::default();
    if let Some(walk) = &block.walk {
        let penalty = walk.budget.unwrap_or(result.barrier.saturating_sub(1));
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(loaded.master_seed, 1, 0));
        let report =
            decoder_barrier_test(&dec, &input, penalty, walk.length, walk.samples, &mut rng)
                .map_err(|e| CliError::Failed(e.to_string()))?;
        println!(
            "walk budget={penalty} length={} samples={} success_fraction={:.6}",
            walk.length,
            report.samples,
            report.success_fraction()
        );
        let mut lines = JsonLines::create(&out.join("walk_failures.jsonl"))?;
        for f in &report.failures {
            lines.write(&tag(serde_json::to_value(f).unwrap()))?;
        }
        let flips: Vec<(usize, PauliKind)> = result.path.iter().map(|&q| (q, kind)).collect();
        let (max_penalty, decoded) = replay_sequence(&dec, &input, &flips);
        println!(
            "witness max_penalty={max_penalty} decoded={}",
            if decoded { "ok" } else { "fail" }
        );
        JsonLines::create(&out.join("witness.json"))?.write(&tag(serde_json::to_value(
            WitnessRecord {
                max_penalty,
                decoded,
            },
        )
        .unwrap()))?;
    }
    if let Some(d) = &block.distance {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(loaded.master_seed, 2, 0));
        let report = distance_fraction_test(
            &dec,
            &input,
            &[PauliKind::X, PauliKind::Z],
            d.max_weight,
            d.budget,
            d.samples,
            &mut rng,
        )
        .map_err(|e| match e {
            AnalysisError::NotExtended => CliError::Config(e.to_string()),
            other => CliError::Failed(other.to_string()),
        })?;
        for r in &report.rows {
            println!(
                "weight={} trials={} successes={} exhaustive={}",
                r.weight, r.trials, r.successes, r.exhaustive
            );
        }
        println!("guaranteed_weight={}", report.guaranteed_weight);
        JsonLines::create(&out.join("distance.json"))?
            .write(&tag(serde_json::to_value(&report).unwrap()))?;
    }
    Ok(())
}

pub fn bounds(config: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let loaded = Loaded::load(config, None, false)?;
    let b = loaded
        .config
        .bounds
        .as_ref()
        .ok_or_else(|| CliError::Config("config has no [bounds] block".into()))?;
    let mut csv = format!("{}\n", BoundRow::CSV_HEADER);
    let mut dominated = 0;
    let mut monotone = true;
    let mut rows = 0;
    for &a in &b.a {
        for &l in &b.l {
            for &m in &b.m {
                let mut last: Option<f64> = None;
                for &beta in &b.beta {
                    let p = BoundParams {
                        a,
                        beta,
                        m,
                        k: b.k,
                        n_checks: b.n,
                        l,
                        r: b.r,
                        c: b.c,
                        v: b.v,
                    };
                    p.validate().map_err(CliError::Config)?;
                    let row = BoundRow::new(&p, b.t);
                    if row.eps_bound_log < exact_tail_log(&p, b.t) - 1e-9 {
                        dominated += 1;
                    }
                    if last.is_some_and(|prev| row.tmem_log <= prev) {
                        monotone = false;
                    }
                    last = Some(row.tmem_log);
                    csv.push_str(&row.csv());
                    csv.push('\n');
                    rows += 1;
                }
            }
        }
    }
    csv.push_str(&format!(
        "# rows={rows} config_hash={}\n# tmem_log increasing in beta: {}\n# closed form >= exact tail: {}\n",
        loaded.hash,
        if monotone { "ok" } else { "violated" },
        if dominated == 0 { "ok".to_string() } else { format!("violated in {dominated} rows") }
    ));
    match out {
        Some(path) => write_text(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn numeric_key(row: &str) -> Vec<(u8, f64, String)> {
    row.split(',')
        .map(|f| match f.parse::<f64>() {
            Ok(x) => (0, x, String::new()),
            Err(_) => (1, 0.0, f.to_string()),
        })
        .collect()
}

pub fn report(files: &[impl AsRef<Path>]) -> Result<(), CliError> {
    if files.is_empty() {
        return Err(CliError::Config(
            "report needs at least one CSV file".into(),
        ));
    }
    let mut groups: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    let mut order = Vec::new();
    for f in files {
        let path = f.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut lines = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        let Some(header) = lines.next() else { continue };
        if !groups.contains_key(header) {
            order.push(header.to_string());
        }
        let group = groups.entry(header.to_string()).or_default();
        let source = path.display().to_string();
        group.extend(lines.map(|l| (l.to_string(), source.clone())));
    }
    for header in order {
        let mut rows = groups.remove(&header).unwrap_or_default();
        rows.sort_by(|a, b| {
            numeric_key(&a.0)
                .partial_cmp(&numeric_key(&b.0))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        println!("{header},source");
        for (row, source) in rows {
            println!("{row},{source}");
        }
        println!();
    }
    Ok(())
}
