use num_bigint::BigUint;
use serde_json::json;

use djr_core::event::Event;
use djr_core::measure::{self, CertifiedMeasure};
use djr_core::modular::{self, SkewState};
use djr_core::rational::{self, Rational};
use djr_core::tower::{self, TowerSpec};
use djr_core::words::to_ascii;
use djr_core::{Error, ShiftSystem, SystemParams};

use crate::args::{Cli, Command, Family};
use crate::config::RunConfig;
use crate::{csv_string, suite, CliError, Output};

pub fn dispatch(cli: &Cli, config: &RunConfig) -> Result<Output, CliError> {
    match &cli.command {
        Command::Block { family, k, pos } => block(&system(config, family)?, *k, pos.as_deref()),
        Command::Density {
            family,
            event,
            level,
            scan,
        } => density(&system(config, family)?, config, event, *level, *scan),
        Command::Measure {
            family,
            event,
            spacer,
            level,
        } => {
            let sys = system(config, family)?;
            let e = match (event, spacer) {
                (Some(text), _) => parse_event(text)?,
                (None, Some(k)) => measure::spacer_event(&sys, *k)?,
                (None, None) => return Err(CliError::Usage("give --event or --spacer".into())),
            };
            certified(&sys, config, &e, *level)
        }
        Command::Rigidity { family, k } => rigidity(&system(config, family)?, config, *k),
        Command::Skew { q, b, steps, order } => skew(*q, config.b(*b)?, *steps, *order),
        Command::Nq {
            b,
            q,
            k_max,
            witnesses,
        } => nq(config.b(*b)?, *q, *k_max, *witnesses),
        Command::Tower { family, q, n } => tower_cmd(&system(config, family)?, config, *q, *n),
        Command::Verify {
            family,
            q_max,
            k_max,
            report,
        } => {
            let sys = system(config, family)?;
            let options = suite::SuiteOptions {
                q_max: q_max.unwrap_or(100),
                k_max: k_max.unwrap_or(5),
            };
            let result = suite::run(&sys, &options);
            let doc = result.to_json(&sys, &options);
            if let Some(path) = report {
                std::fs::write(
                    path,
                    serde_json::to_string_pretty(&doc).expect("json values serialize") + "\n",
                )?;
            }
            if !result.pass() {
                eprintln!("failed checks: {}", result.failed().join(", "));
            }
            Ok(Output::new(result.to_text(), doc).with_verdict(result.pass()))
        }
    }
}

fn system(config: &RunConfig, family: &Family) -> Result<ShiftSystem, CliError> {
    let params = SystemParams::new(config.a(family)?, config.b(family.b)?)?;
    Ok(ShiftSystem::with_cap(params, config.cap))
}

fn parse_event(text: &str) -> Result<Event, CliError> {
    text.parse::<Event>().map_err(CliError::Core)
}

fn rational_json(x: &Rational) -> serde_json::Value {
    json!({ "num": x.numer().to_string(), "den": x.denom().to_string() })
}

fn block(sys: &ShiftSystem, k: usize, pos: Option<&str>) -> Result<Output, CliError> {
    let head = json!({ "a": sys.a(), "b": sys.b(), "k": k, "height": sys.height(k).to_string() });
    if let Some(pos) = pos {
        let p: BigUint = pos
            .parse()
            .map_err(|_| CliError::Usage(format!("bad position {pos:?}")))?;
        let symbol = sys.symbol_at(k, &p)?;
        let mut j = head;
        j["pos"] = json!(pos);
        j["symbol"] = json!(symbol);
        return Ok(Output::new(symbol.to_string(), j));
    }
    let symbols = to_ascii(&sys.symbols(k)?);
    let mut j = head;
    j["symbols"] = json!(symbols);
    Ok(Output::new(symbols, j))
}

fn level_or_default(
    sys: &ShiftSystem,
    config: &RunConfig,
    e: &Event,
    level: Option<usize>,
) -> Result<usize, CliError> {
    match level.or(config.depth) {
        Some(m) => Ok(m),
        None => Ok(measure::default_level(sys, e)?),
    }
}

fn density(
    sys: &ShiftSystem,
    config: &RunConfig,
    text: &str,
    level: Option<usize>,
    scan: bool,
) -> Result<Output, CliError> {
    let e = parse_event(text)?;
    let m = level_or_default(sys, config, &e, level)?;
    let d = if scan {
        measure::density_by_scan(sys, m, &e)?
    } else {
        measure::density_in_level(sys, m, &e)?
    };
    let text = format!("d_{m} = {d} (≈ {:.12})", rational::to_f64(&d));
    let mut j = rational_json(&d);
    j["level"] = json!(m);
    let csv = csv_string([(m, d.numer().to_string(), d.denom().to_string())]);
    Ok(Output::new(text, j).with_csv(format!("level,num,den\n{csv}")))
}

fn certified(
    sys: &ShiftSystem,
    config: &RunConfig,
    e: &Event,
    level: Option<usize>,
) -> Result<Output, CliError> {
    let m = level_or_default(sys, config, e, level)?;
    let c = measure::certified_measure(sys, m, e)?;
    let j = serde_json::to_value(&c).expect("measures serialize");
    Ok(Output::new(c.to_string(), j).with_csv(csv_string([&c])))
}

fn rigidity(sys: &ShiftSystem, config: &RunConfig, k: usize) -> Result<Output, CliError> {
    let t = sys.height_u64(k).ok_or(Error::CapExceeded {
        level: k,
        height: sys.height(k),
        cap: sys.cap(),
    })?;
    let deepest = sys.max_materializable_level().unwrap_or(0);
    let k_hi = config
        .depth
        .unwrap_or_else(|| (k + 2).min(deepest))
        .max(k + 1);
    let r = measure::coding_distance_certified(sys, t, k + 1, k_hi)?;
    let limit = rational::ratio(1u32, BigUint::from(2u32).pow(k as u32));
    let pass = r.steps_within_bound && r.limit.upper() < limit;
    let text = format!(
        "delta(T^h{k}) = {}\ndelta(T^h{k}) < {limit}: {}",
        r.limit,
        if pass { "PASS" } else { "FAIL" }
    );
    let mut j = serde_json::to_value(&r).expect("results serialize");
    j["k"] = json!(k);
    j["bound"] = rational_json(&limit);
    j["pass"] = json!(pass);
    Ok(Output::new(text, j).with_verdict(pass))
}

fn skew(q: u64, b: u64, steps: u64, order: bool) -> Result<Output, CliError> {
    let mut s = SkewState::origin(q, b)?;
    let mut states = Vec::new();
    for _ in 0..steps {
        s = s.step();
        states.push((s.x(), s.y()));
    }
    let mut text = states
        .iter()
        .map(|(x, y)| format!("({x},{y})"))
        .collect::<Vec<_>>()
        .join(" ");
    let mut j = json!({ "q": q, "b": b, "states": states });
    if order {
        let o = modular::skew_order(q, b)?;
        text.push_str(&format!(
            "\norbit period {}, permutation order {}",
            o.orbit_period, o.permutation_order
        ));
        j["orbit_period"] = json!(o.orbit_period);
        j["permutation_order"] = json!(o.permutation_order.to_string());
    }
    let rows = states.iter().enumerate().map(|(i, &(x, y))| (i + 1, x, y));
    Ok(Output::new(text, j).with_csv(format!("step,x,y\n{}", csv_string(rows))))
}

fn nq(b: u64, q: u64, k_max: usize, witnesses: bool) -> Result<Output, CliError> {
    let params = SystemParams::new(1, b)?;
    let csv = csv_string(modular::residue_sweep(params, [q], k_max));
    let (list, pass) = if witnesses {
        match modular::verify_prime_relation(params, q, k_max) {
            Ok(w) => (w, true),
            Err(Error::NoWitness { .. }) => (Vec::new(), false),
            Err(e) => return Err(e.into()),
        }
    } else {
        (modular::nq_set(params, q, k_max)?, true)
    };
    let text = list
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    let key = if witnesses { "witnesses" } else { "nq" };
    let j = json!({ "b": b, "q": q, "k_max": k_max, key: list });
    Ok(Output::new(text, j).with_csv(csv).with_verdict(pass))
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn interval(c: &CertifiedMeasure) -> String {
    c.to_string()
}

fn approx(x: &Rational) -> String {
    format!("{x} (≈ {:.9})", rational::to_f64(x))
}

fn tower_cmd(sys: &ShiftSystem, config: &RunConfig, q: u64, n: usize) -> Result<Output, CliError> {
    let spec = TowerSpec::new(sys, q, n, config.depth.unwrap_or(n + 3))?;
    if !spec.bound_positive {
        eprintln!("warning: 1 - ((q-1)(q-2)/2)/b^(N-1) <= 0, the coverage bound is vacuous");
    }
    let r = tower::rank_one_report(sys, &spec)?;
    let lines = [
        format!("T^{q} tower over A*_{n}, scan level {}", spec.m),
        format!("mu(B*) = {}", interval(&r.mu_base)),
        format!("mu(A*) = {}", interval(&r.mu_a)),
        format!("disjoint levels: {}", verdict(r.disjoint_ok())),
        format!(
            "return estimate {} < {}: {}",
            interval(&r.claim2.lhs),
            approx(&r.claim2.bound),
            verdict(r.claim2.ok)
        ),
        format!(
            "coverage {} > {}: {}",
            interval(&r.coverage.coverage),
            approx(&r.coverage.bound),
            verdict(r.coverage.ok)
        ),
        format!(
            "  with q(q-1)/2: > {}: {}",
            approx(&r.coverage.triangle_bound),
            verdict(r.coverage.triangle_ok)
        ),
        format!("tau bijective, containment: {}", verdict(r.tau_ok())),
        format!(
            "mu(T^h_N B* Δ B*) < mu(B*)/b^(N-1): {}",
            verdict(r.ineq2.ok)
        ),
        format!(
            "level-N tower > 1 - b^2 h_N/h_(N+1): {}",
            verdict(r.ineq3.ok())
        ),
        format!(
            "complement identity mu(C_N) = 1 - mu(S_N): {}",
            verdict(r.complement.ok)
        ),
    ];
    let j = serde_json::to_value(&r).expect("reports serialize");
    let csv = csv_string([r.csv_row(sys)]);
    Ok(Output::new(lines.join("\n"), j)
        .with_csv(csv)
        .with_verdict(r.all_ok()))
}
