//! Plain-text key=value configuration with `[model]`, `[optimizer]` and
//! `[sweep]` sections.
//!
//! Unknown keys are rejected (all of them listed), malformed lines are
//! reported with their line number, and value-level invariants surface
//! through the model constructors (`requires 2 < q < gamma`, ...). Inline
//! overrides of the form `section.key=value` apply on top of the file — or
//! on top of the defaults when no file is given.

use std::collections::BTreeMap;
use std::path::Path;

use crate::bifurcation::{LambdaGrid, SweepConfig};
use crate::error::{Error, Result};
use crate::model::{Grid, GridDim, ModelSpec};
use crate::optim::OptimizerOptions;

/// Fully resolved configuration of one run.
#[derive(Debug, Clone)]
pub struct ParsedConfig {
    pub model: ModelSpec,
    pub optimizer: OptimizerOptions,
    pub sweep: SweepConfig,
    /// Canonical snapshot of every effective setting, for the manifest.
    pub snapshot: String,
}

const MODEL_KEYS: &[&str] = &["model", "a", "q", "gamma", "mu", "dim", "n", "side"];
const OPT_KEYS: &[&str] = &[
    "max_iter", "grad_tol", "restarts", "seed", "init_step", "shrink", "armijo", "threads",
];
const SWEEP_KEYS: &[&str] = &["grid", "count", "lo", "hi", "lambdas", "margin", "warm_start"];

#[derive(Default)]
struct Raw {
    model: BTreeMap<String, String>,
    optimizer: BTreeMap<String, String>,
    sweep: BTreeMap<String, String>,
}

impl Raw {
    fn section(&mut self, name: &str) -> Option<&mut BTreeMap<String, String>> {
        match name {
            "model" => Some(&mut self.model),
            "optimizer" => Some(&mut self.optimizer),
            "sweep" => Some(&mut self.sweep),
            _ => None,
        }
    }
}

fn parse_file(text: &str, raw: &mut Raw) -> Result<()> {
    let mut current = "model".to_string();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim();
            if raw.section(name).is_none() {
                return Err(Error::Config(format!(
                    "line {lineno}: unknown section [{name}], expected [model], [optimizer] or [sweep]"
                )));
            }
            current = name.to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {lineno}: expected key = value, got '{line}'"
            )));
        };
        let section = raw.section(&current).expect("current section is valid");
        section.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(())
}

fn apply_overrides(overrides: &[String], raw: &mut Raw) -> Result<()> {
    for o in overrides {
        let Some((path, value)) = o.split_once('=') else {
            return Err(Error::Config(format!(
                "override '{o}' must look like section.key=value"
            )));
        };
        let Some((section, key)) = path.trim().split_once('.') else {
            return Err(Error::Config(format!(
                "override '{o}' must name a section, e.g. model.q=3.0"
            )));
        };
        let Some(map) = raw.section(section.trim()) else {
            return Err(Error::Config(format!(
                "override '{o}': unknown section '{section}'"
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(())
}

fn reject_unknown(map: &BTreeMap<String, String>, allowed: &[&str], section: &str) -> Result<()> {
    let unknown: Vec<&str> = map
        .keys()
        .map(|k| k.as_str())
        .filter(|k| !allowed.contains(k))
        .collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "unknown keys in [{section}]: {} (allowed: {})",
            unknown.join(", "),
            allowed.join(", ")
        )))
    }
}

fn get_f64(map: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::Config(format!("{key}: expected a number, got '{v}'"))),
    }
}

fn get_usize(map: &BTreeMap<String, String>, key: &str, default: usize) -> Result<usize> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::Config(format!("{key}: expected an integer, got '{v}'"))),
    }
}

fn get_u64(map: &BTreeMap<String, String>, key: &str, default: u64) -> Result<u64> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::Config(format!("{key}: expected an integer, got '{v}'"))),
    }
}

fn get_bool(map: &BTreeMap<String, String>, key: &str, default: bool) -> Result<bool> {
    match map.get(key).map(|s| s.as_str()) {
        None => Ok(default),
        Some("true") | Some("1") => Ok(true),
        Some("false") | Some("0") => Ok(false),
        Some(v) => Err(Error::Config(format!(
            "{key}: expected true or false, got '{v}'"
        ))),
    }
}

/// Parses a config file and/or inline `section.key=value` overrides into the
/// model, optimizer and sweep settings. Defaults (documented in `--help`):
/// Kirchhoff model with `a=1, q=3` on a 1D grid with `n=200`, the default
/// optimizer, and a 64-point geometric sweep on `[0.05, 1.10] * lambda*`.
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> Result<ParsedConfig> {
    let mut raw = Raw::default();
    if let Some(path) = path {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config '{}': {e}", path.display()))
        })?;
        parse_file(&text, &mut raw)?;
    }
    apply_overrides(overrides, &mut raw)?;

    reject_unknown(&raw.model, MODEL_KEYS, "model")?;
    reject_unknown(&raw.optimizer, OPT_KEYS, "optimizer")?;
    reject_unknown(&raw.sweep, SWEEP_KEYS, "sweep")?;

    // [model]
    let kind = raw
        .model
        .get("model")
        .map(|s| s.as_str())
        .unwrap_or("kirchhoff")
        .to_ascii_lowercase();
    let dim = match get_usize(&raw.model, "dim", 1)? {
        1 => GridDim::One,
        2 => GridDim::Two,
        other => {
            return Err(Error::Config(format!("dim must be 1 or 2, got {other}")));
        }
    };
    let n = get_usize(&raw.model, "n", 200)?;
    let side = get_f64(&raw.model, "side", 1.0)?;
    let grid = Grid::new(dim, n, side)?;
    let q = get_f64(&raw.model, "q", 3.0)?;
    let model = match kind.as_str() {
        "kirchhoff" => {
            if raw.model.contains_key("gamma") || raw.model.contains_key("mu") {
                return Err(Error::Config(
                    "gamma and mu apply to the nep model only".into(),
                ));
            }
            ModelSpec::kirchhoff(get_f64(&raw.model, "a", 1.0)?, q, grid)?
        }
        "nep" => {
            if raw.model.contains_key("a") {
                return Err(Error::Config("a applies to the kirchhoff model only".into()));
            }
            ModelSpec::nep(
                get_f64(&raw.model, "gamma", 4.0)?,
                q,
                get_f64(&raw.model, "mu", 1.0)?,
                grid,
            )?
        }
        other => {
            return Err(Error::Config(format!(
                "unknown model '{other}', expected kirchhoff or nep"
            )));
        }
    };

    // [optimizer]
    let defaults = OptimizerOptions::default();
    let optimizer = OptimizerOptions {
        max_iter: get_usize(&raw.optimizer, "max_iter", defaults.max_iter)?,
        grad_tol: get_f64(&raw.optimizer, "grad_tol", defaults.grad_tol)?,
        restarts: get_usize(&raw.optimizer, "restarts", defaults.restarts)?,
        seed: get_u64(&raw.optimizer, "seed", defaults.seed)?,
        init_step: get_f64(&raw.optimizer, "init_step", defaults.init_step)?,
        shrink: get_f64(&raw.optimizer, "shrink", defaults.shrink)?,
        armijo: get_f64(&raw.optimizer, "armijo", defaults.armijo)?,
        threads: get_usize(&raw.optimizer, "threads", defaults.threads)?,
    };
    optimizer.validate()?;

    // [sweep]
    let margin = get_f64(&raw.sweep, "margin", 0.10)?;
    let kind = raw
        .sweep
        .get("grid")
        .map(|s| s.as_str())
        .unwrap_or("geometric")
        .to_ascii_lowercase();
    let lambda_grid = match kind.as_str() {
        "geometric" | "linear" => {
            let count = get_usize(&raw.sweep, "count", 64)?;
            let lo_mult = get_f64(&raw.sweep, "lo", 0.05)?;
            let hi_mult = get_f64(&raw.sweep, "hi", 1.0 + margin)?;
            if kind == "geometric" {
                LambdaGrid::Geometric {
                    count,
                    lo_mult,
                    hi_mult,
                }
            } else {
                LambdaGrid::Linear {
                    count,
                    lo_mult,
                    hi_mult,
                }
            }
        }
        "explicit" => {
            let list = raw.sweep.get("lambdas").ok_or_else(|| {
                Error::Config("grid = explicit requires lambdas = v1,v2,...".into())
            })?;
            let mut values = Vec::new();
            for part in list.split(',') {
                values.push(part.trim().parse::<f64>().map_err(|_| {
                    Error::Config(format!("lambdas: expected numbers, got '{part}'"))
                })?);
            }
            LambdaGrid::Explicit(values)
        }
        other => {
            return Err(Error::Config(format!(
                "unknown grid kind '{other}', expected geometric, linear or explicit"
            )));
        }
    };
    let warm_start = get_bool(&raw.sweep, "warm_start", true)?;
    let sweep = SweepConfig {
        model,
        lambda_grid: lambda_grid.clone(),
        solver_opts: optimizer,
        margin,
        warm_start,
    };

    let snapshot = render_snapshot(&model, &optimizer, &lambda_grid, margin, warm_start);
    Ok(ParsedConfig {
        model,
        optimizer,
        sweep,
        snapshot,
    })
}

/// Canonical snapshot: every effective setting, one per line, fixed order.
fn render_snapshot(
    model: &ModelSpec,
    opt: &OptimizerOptions,
    grid: &LambdaGrid,
    margin: f64,
    warm_start: bool,
) -> String {
    let mut s = String::new();
    s.push_str("[model]\n");
    match model {
        ModelSpec::Kirchhoff { a, q, grid } => {
            s.push_str("model = kirchhoff\n");
            s.push_str(&format!("a = {a}\n"));
            s.push_str(&format!("q = {q}\n"));
            s.push_str(&format!("dim = {}\n", grid.dim().as_usize()));
            s.push_str(&format!("n = {}\n", grid.n()));
            s.push_str(&format!("side = {}\n", grid.side()));
        }
        ModelSpec::Nep { gamma, q, mu, grid } => {
            s.push_str("model = nep\n");
            s.push_str(&format!("gamma = {gamma}\n"));
            s.push_str(&format!("q = {q}\n"));
            s.push_str(&format!("mu = {mu}\n"));
            s.push_str(&format!("dim = {}\n", grid.dim().as_usize()));
            s.push_str(&format!("n = {}\n", grid.n()));
            s.push_str(&format!("side = {}\n", grid.side()));
        }
    }
    s.push_str("[optimizer]\n");
    s.push_str(&format!("max_iter = {}\n", opt.max_iter));
    s.push_str(&format!("grad_tol = {}\n", opt.grad_tol));
    s.push_str(&format!("restarts = {}\n", opt.restarts));
    s.push_str(&format!("seed = {}\n", opt.seed));
    s.push_str(&format!("init_step = {}\n", opt.init_step));
    s.push_str(&format!("shrink = {}\n", opt.shrink));
    s.push_str(&format!("armijo = {}\n", opt.armijo));
    s.push_str("[sweep]\n");
    match grid {
        LambdaGrid::Geometric {
            count,
            lo_mult,
            hi_mult,
        } => {
            s.push_str("grid = geometric\n");
            s.push_str(&format!("count = {count}\n"));
            s.push_str(&format!("lo = {lo_mult}\n"));
            s.push_str(&format!("hi = {hi_mult}\n"));
        }
        LambdaGrid::Linear {
            count,
            lo_mult,
            hi_mult,
        } => {
            s.push_str("grid = linear\n");
            s.push_str(&format!("count = {count}\n"));
            s.push_str(&format!("lo = {lo_mult}\n"));
            s.push_str(&format!("hi = {hi_mult}\n"));
        }
        LambdaGrid::Explicit(values) => {
            s.push_str("grid = explicit\n");
            let list: Vec<String> = values.iter().map(|v| v.to_string()).collect();
            s.push_str(&format!("lambdas = {}\n", list.join(",")));
        }
    }
    s.push_str(&format!("margin = {margin}\n"));
    s.push_str(&format!("warm_start = {warm_start}\n"));
    s
}

/// Grid-spec summary used in CSV header comments.
pub fn grid_spec_summary(grid: &LambdaGrid) -> String {
    match grid {
        LambdaGrid::Geometric {
            count,
            lo_mult,
            hi_mult,
        } => format!("geometric:{count}:[{lo_mult},{hi_mult}]"),
        LambdaGrid::Linear {
            count,
            lo_mult,
            hi_mult,
        } => format!("linear:{count}:[{lo_mult},{hi_mult}]"),
        LambdaGrid::Explicit(v) => format!("explicit:{}", v.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(name: &str, text: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("nehari_config_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(text.as_bytes()).unwrap();
        path
    }

    #[test]
    fn round_trip_kirchhoff() {
        let path = write_temp(
            "k.cfg",
            "[model]\nmodel = kirchhoff\na = 1.0\nq = 3.0\ndim = 1\nn = 200\n\n[optimizer]\nseed = 9\n",
        );
        let cfg = parse_config(Some(&path), &[]).unwrap();
        assert!(matches!(cfg.model, ModelSpec::Kirchhoff { .. }));
        assert_eq!(cfg.model.grid().n(), 200);
        assert_eq!(cfg.optimizer.seed, 9);
        assert!(cfg.snapshot.contains("model = kirchhoff"));
    }

    #[test]
    fn hypothesis_violations_are_named() {
        let path = write_temp("bad.cfg", "[model]\nmodel = nep\nq = 5.0\ngamma = 4.0\n");
        let err = parse_config(Some(&path), &[]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("q < gamma"), "{msg}");
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let path = write_temp("mal.cfg", "[model]\nmodel = kirchhoff\nnonsense without equals\n");
        let err = parse_config(Some(&path), &[]).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn unknown_keys_are_listed() {
        let path = write_temp("unk.cfg", "[model]\nbogus = 1\nwhat = 2\n");
        let err = parse_config(Some(&path), &[]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.contains("what"), "{msg}");
    }

    #[test]
    fn missing_file_is_an_error_with_path() {
        let err = parse_config(Some(Path::new("/no/such/file.cfg")), &[]).unwrap_err();
        assert!(err.to_string().contains("/no/such/file.cfg"));
    }

    #[test]
    fn overrides_apply_without_a_file() {
        let cfg = parse_config(
            None,
            &[
                "model.model=nep".into(),
                "model.gamma=4.5".into(),
                "model.q=2.5".into(),
                "model.n=32".into(),
                "optimizer.seed=3".into(),
                "sweep.count=8".into(),
            ],
        )
        .unwrap();
        assert!(matches!(cfg.model, ModelSpec::Nep { .. }));
        assert_eq!(cfg.model.grid().n(), 32);
        match cfg.sweep.lambda_grid {
            LambdaGrid::Geometric { count, .. } => assert_eq!(count, 8),
            ref other => panic!("unexpected grid {other:?}"),
        }
    }

    #[test]
    fn defaults_are_complete() {
        let cfg = parse_config(None, &[]).unwrap();
        assert!(matches!(cfg.model, ModelSpec::Kirchhoff { .. }));
        assert_eq!(cfg.model.grid().n(), 200);
        assert_eq!(cfg.optimizer.restarts, 8);
        assert!(cfg.sweep.warm_start);
    }

    #[test]
    fn snapshot_is_stable() {
        let a = parse_config(None, &["model.q=2.9".into()]).unwrap();
        let b = parse_config(None, &["model.q=2.9".into()]).unwrap();
        assert_eq!(a.snapshot, b.snapshot);
    }
}
