//! The four subcommands, each producing a table or a report.

use std::io::Write;

use anyhow::{bail, Context, Result};
use nalgebra::DMatrix;
use serde_json::json;

use super::args::{ExpandArgs, GeometryArgs, InfiniteMode, LoopsArgs, ModelArgs, ModelKind, PatternKind, SimulateArgs};
use super::format::{parse_count_list, parse_grid, Cell, Table};
use crate::contraction::{enumerate_pattern, normal_invariant_via_loops, parse_pattern, LoopPolynomial, NormalInvariant};
use crate::expansion::{expansion_from_l_moments, expansion_multinomial_closed, expansion_normal_closed, ExpansionResult};
use crate::geometry::{
    analytic_invariants_multinomial, analytic_invariants_normal, estimate_l_moments, invariants_from_l_moments,
    LMoments, ScalarInvariants,
};
use crate::models::{ModelFamily, MultinomialModel, ParamPoint, TwoNormalMixtureModel, ZeroMeanNormalModel};
use crate::simulation::{invariance_check_normal, simulate_risk, InfinitePolicy, RiskEstimate, SimulationPlan};

/// A fully validated model selection.
enum Resolved {
    Multinomial { model: MultinomialModel, points: Vec<ParamPoint> },
    Normal { model: ZeroMeanNormalModel, sigma: DMatrix<f64>, point: ParamPoint },
    Mixture { model: TwoNormalMixtureModel, points: Vec<ParamPoint> },
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(";")
}

fn parse_cov(text: &str, dim: Option<usize>) -> Result<DMatrix<f64>> {
    let v = parse_grid(text)?;
    let p = (v.len() as f64).sqrt().round() as usize;
    if p * p != v.len() || p == 0 {
        bail!("covariance needs p×p entries, got {}", v.len());
    }
    if let Some(d) = dim {
        if d != p {
            bail!("--dim {d} does not match a {p}×{p} covariance");
        }
    }
    Ok(DMatrix::from_row_slice(p, p, &v))
}

impl Resolved {
    fn from_args(a: &ModelArgs) -> Result<Self> {
        let grid = a.theta_grid.as_deref().map(parse_grid).transpose()?;
        match a.model {
            ModelKind::Multinomial => {
                let points: Vec<Vec<f64>> = match (&a.probs, grid) {
                    (Some(_), Some(_)) => bail!("give either --probs or --theta-grid, not both"),
                    (Some(p), None) => vec![parse_grid(p)?],
                    (None, Some(g)) => g.into_iter().map(|m1| vec![m1]).collect(),
                    (None, None) => bail!("multinomial needs --probs or --theta-grid"),
                };
                let model = MultinomialModel::new(points[0].len())?;
                let points = points.iter().map(|m| model.point(m)).collect::<crate::Result<_>>()?;
                Ok(Resolved::Multinomial { model, points })
            }
            ModelKind::Normal => {
                let sigma = match (&a.cov, a.dim) {
                    (Some(c), dim) => parse_cov(c, dim)?,
                    (None, Some(p)) => DMatrix::identity(p, p),
                    (None, None) => bail!("normal needs --dim or --cov"),
                };
                let model = ZeroMeanNormalModel::new(sigma.nrows())?;
                let point = model.point_from_matrix(&sigma)?;
                Ok(Resolved::Normal { model, sigma, point })
            }
            ModelKind::Mixture => {
                let sigma2 = a.sigma2.context("mixture needs --sigma2")?;
                let grid = grid.context("mixture needs --theta-grid")?;
                let model = TwoNormalMixtureModel::new(sigma2)?;
                let points = grid.into_iter().map(|t| model.point(t)).collect::<crate::Result<_>>()?;
                Ok(Resolved::Mixture { model, points })
            }
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Resolved::Multinomial { .. } => "multinomial",
            Resolved::Normal { .. } => "normal",
            Resolved::Mixture { .. } => "mixture",
        }
    }

    /// `(dim, θ label)` for every point.
    fn labels(&self) -> Vec<(usize, String)> {
        match self {
            Resolved::Multinomial { points, .. } | Resolved::Mixture { points, .. } => {
                points.iter().map(|p| (p.dim(), join(p.coords()))).collect()
            }
            Resolved::Normal { sigma, .. } => {
                let p = sigma.nrows();
                let label = if *sigma == DMatrix::identity(p, p) {
                    "I".to_string()
                } else {
                    join(sigma.transpose().as_slice())
                };
                vec![(p, label)]
            }
        }
    }
}

fn alphas(text: &str) -> Result<Vec<f64>> {
    parse_grid(text).context("invalid --alpha")
}

fn mc_moments<M: ModelFamily>(model: &M, theta: &ParamPoint, samples: usize, seed: u64) -> Result<LMoments> {
    estimate_l_moments(model, theta, samples, seed)
        .with_context(|| format!("Monte-Carlo geometry at θ = {:?}", theta.coords()))
}

/// Per point, per α: the expansion and, for Monte-Carlo input, the s.e. of `c₂`.
type ExpansionGrid = Vec<Vec<(ExpansionResult, Option<f64>)>>;

fn expansions(model: &Resolved, alphas: &[f64], mc_samples: usize, seed: u64) -> Result<ExpansionGrid> {
    match model {
        Resolved::Multinomial { points, .. } => points
            .iter()
            .map(|m| alphas.iter().map(|&a| Ok((expansion_multinomial_closed(m, a)?, None))).collect())
            .collect(),
        Resolved::Normal { sigma, .. } => {
            let row = alphas.iter().map(|&a| Ok((expansion_normal_closed(sigma.nrows(), a)?, None))).collect::<Result<_>>()?;
            Ok(vec![row])
        }
        Resolved::Mixture { model, points } => points
            .iter()
            .map(|theta| {
                let l = mc_moments(model, theta, mc_samples, seed)?;
                alphas
                    .iter()
                    .map(|&a| {
                        let (e, se) = expansion_from_l_moments(&l, a)?;
                        Ok((e, Some(se)))
                    })
                    .collect()
            })
            .collect(),
    }
}

pub fn expand(a: &ExpandArgs) -> Result<Table> {
    let model = Resolved::from_args(&a.model)?;
    let alphas = alphas(&a.alpha)?;
    let ns = parse_count_list(&a.n).context("invalid --n")?;
    let mut table = Table::new(vec![
        "model", "dim", "theta", "alpha", "n", "c1", "c2", "c2_se", "value", "value_se", "provenance",
    ]);
    let results = expansions(&model, &alphas, a.mc_samples, a.seed)?;
    for ((dim, label), per_alpha) in model.labels().into_iter().zip(results) {
        for (e, se) in per_alpha {
            for &n in &ns {
                let nf = n as f64;
                table.push(vec![
                    Cell::Text(model.name().into()),
                    Cell::Int(dim as u64),
                    Cell::Text(label.clone()),
                    Cell::Real(e.alpha),
                    Cell::Int(n as u64),
                    Cell::Real(e.c1),
                    Cell::Real(e.c2),
                    Cell::opt(se),
                    Cell::Real(e.value(nf)),
                    Cell::opt(se.map(|s| s / (nf * nf))),
                    Cell::Text(e.provenance.to_string()),
                ]);
            }
        }
    }
    Ok(table)
}

const INVARIANT_NAMES: [&str; 11] =
    ["F_alpha", "F_e", "F_m", "TT", "TdTd", "R", "S_ee_cross", "S_ee_trace", "S_em_cross", "S_em_trace", "F_conversion"];

fn invariant_values(inv: &ScalarInvariants) -> [f64; 11] {
    [
        inv.f_alpha,
        inv.f_e,
        inv.f_m,
        inv.tt,
        inv.tdtd,
        inv.r_contract,
        inv.s_ee_cross,
        inv.s_ee_trace,
        inv.s_em_cross,
        inv.s_em_trace,
        inv.f_conversion_residual(),
    ]
}

fn invariant_errors(inv: &ScalarInvariants) -> Option<[f64; 11]> {
    inv.std_error.as_ref().map(|e| {
        [
            e.f_alpha,
            e.f_e,
            e.f_m,
            e.tt,
            e.tdtd,
            e.r_contract,
            e.s_ee_cross,
            e.s_ee_trace,
            e.s_em_cross,
            e.s_em_trace,
            e.f_conversion,
        ]
    })
}

pub fn geometry(a: &GeometryArgs) -> Result<Table> {
    let model = Resolved::from_args(&a.model)?;
    let alphas = alphas(&a.alpha)?;
    let mut headers = vec!["model", "dim", "theta", "alpha", "source"];
    headers.extend(INVARIANT_NAMES);
    headers.extend([
        "F_alpha_se", "F_e_se", "F_m_se", "TT_se", "TdTd_se", "R_se", "S_ee_cross_se", "S_ee_trace_se",
        "S_em_cross_se", "S_em_trace_se", "F_conversion_se",
    ]);
    let mut table = Table::new(headers);
    let labels = model.labels();

    let mut emit = |idx: usize, source: &str, inv: &ScalarInvariants| {
        let (dim, label) = &labels[idx];
        let mut row = vec![
            Cell::Text(model.name().into()),
            Cell::Int(*dim as u64),
            Cell::Text(label.clone()),
            Cell::Real(inv.alpha),
            Cell::Text(source.into()),
        ];
        row.extend(invariant_values(inv).map(Cell::Real));
        match invariant_errors(inv) {
            Some(se) => row.extend(se.map(Cell::Real)),
            None => row.extend(std::iter::repeat(Cell::Missing).take(11)),
        }
        table.push(row);
    };

    let (analytic, mc): (Vec<Option<Vec<ScalarInvariants>>>, Vec<Option<LMoments>>) = match &model {
        Resolved::Multinomial { model: fam, points } => {
            let an = points
                .iter()
                .map(|m| alphas.iter().map(|&al| analytic_invariants_multinomial(m, al)).collect::<crate::Result<Vec<_>>>().map(Some))
                .collect::<crate::Result<Vec<_>>>()?;
            let mc = points
                .iter()
                .map(|m| (!a.no_mc).then(|| mc_moments(fam, m, a.mc_samples, a.seed)).transpose())
                .collect::<Result<Vec<_>>>()?;
            (an, mc)
        }
        Resolved::Normal { model: fam, sigma, point } => {
            let an = alphas.iter().map(|&al| analytic_invariants_normal(sigma.nrows(), al)).collect::<crate::Result<Vec<_>>>()?;
            let mc = (!a.no_mc).then(|| mc_moments(fam, point, a.mc_samples, a.seed)).transpose()?;
            (vec![Some(an)], vec![mc])
        }
        Resolved::Mixture { model: fam, points } => {
            if a.no_mc {
                bail!("the mixture family has no analytic invariants; drop --no-mc");
            }
            let mc = points
                .iter()
                .map(|t| mc_moments(fam, t, a.mc_samples, a.seed).map(Some))
                .collect::<Result<Vec<_>>>()?;
            (vec![None; points.len()], mc)
        }
    };
    for (idx, (an, l)) in analytic.iter().zip(&mc).enumerate() {
        for (k, &al) in alphas.iter().enumerate() {
            if let Some(an) = an {
                emit(idx, "analytic", &an[k]);
            }
            if let Some(l) = l {
                emit(idx, "monte-carlo", &invariants_from_l_moments(l, &l.fisher, al)?);
            }
        }
    }
    Ok(table)
}

fn run_plan<M: ModelFamily>(family: M, theta: &ParamPoint, alpha: f64, n: usize, a: &SimulateArgs) -> Result<RiskEstimate> {
    let mut plan = SimulationPlan::new(family, theta.clone(), alpha, n, a.reps, a.seed);
    plan.policy = match a.infinite {
        InfiniteMode::Exclude => InfinitePolicy::CountAndExclude,
        InfiniteMode::Propagate => InfinitePolicy::Propagate,
    };
    Ok(simulate_risk(&plan)?)
}

pub fn simulate(a: &SimulateArgs) -> Result<Table> {
    let model = Resolved::from_args(&a.model)?;
    let alphas = alphas(&a.alpha)?;
    let ns = parse_count_list(&a.n).context("invalid --n")?;
    if let Some(other) = &a.compare_cov {
        return invariance(a, &model, other, &alphas, &ns);
    }
    let results = expansions(&model, &alphas, a.mc_samples, a.seed)?;
    let mut table = Table::new(vec![
        "model", "dim", "theta", "alpha", "n", "reps", "seed", "mean", "std_error", "reps_used", "infinite_count",
        "boundary_count", "expansion_value", "z_score",
    ]);
    for (idx, ((dim, label), per_alpha)) in model.labels().into_iter().zip(results).enumerate() {
        for (k, &alpha) in alphas.iter().enumerate() {
            for &n in &ns {
                let est = match &model {
                    Resolved::Multinomial { model, points } => run_plan(*model, &points[idx], alpha, n, a)?,
                    Resolved::Normal { model, point, .. } => run_plan(model.clone(), point, alpha, n, a)?,
                    Resolved::Mixture { model, points } => run_plan(*model, &points[idx], alpha, n, a)?,
                };
                let est = est.with_expansion(&per_alpha[k].0, n);
                table.push(vec![
                    Cell::Text(model.name().into()),
                    Cell::Int(dim as u64),
                    Cell::Text(label.clone()),
                    Cell::Real(alpha),
                    Cell::Int(n as u64),
                    Cell::Int(a.reps as u64),
                    Cell::Int(a.seed),
                    Cell::Real(est.mean),
                    Cell::Real(est.std_error),
                    Cell::Int(est.reps_used as u64),
                    Cell::Int(est.infinite_count as u64),
                    Cell::Int(est.boundary_count as u64),
                    Cell::opt(est.expansion_value),
                    Cell::opt(est.z_score().filter(|z| z.is_finite())),
                ]);
            }
        }
    }
    Ok(table)
}

fn invariance(a: &SimulateArgs, model: &Resolved, other: &str, alphas: &[f64], ns: &[usize]) -> Result<Table> {
    let Resolved::Normal { sigma, .. } = model else {
        bail!("--compare-cov applies to the normal model only");
    };
    let p = sigma.nrows();
    let sigma_b = parse_cov(other, Some(p)).context("invalid --compare-cov")?;
    let mut table = Table::new(vec![
        "model", "dim", "alpha", "n", "reps", "mean_a", "se_a", "mean_b", "se_b", "z", "pass",
    ]);
    for &alpha in alphas {
        for &n in ns {
            let rep = invariance_check_normal(p, sigma, &sigma_b, alpha, n, a.reps, a.seed)?;
            table.push(vec![
                Cell::Text("normal".into()),
                Cell::Int(p as u64),
                Cell::Real(alpha),
                Cell::Int(n as u64),
                Cell::Int(a.reps as u64),
                Cell::Real(rep.a.mean),
                Cell::Real(rep.a.std_error),
                Cell::Real(rep.b.mean),
                Cell::Real(rep.b.std_error),
                Cell::Real(rep.z),
                Cell::Bool(rep.pass),
            ]);
        }
    }
    Ok(table)
}

pub struct LoopReport {
    pub pattern: &'static str,
    pub poly: LoopPolynomial,
}

impl LoopReport {
    /// `512,1536,2048 → p^3+3p^2+4p`
    pub fn line(&self) -> String {
        let counts: Vec<String> = self.poly.raw_counts().iter().map(u64::to_string).collect();
        format!("{} → {}", counts.join(","), self.poly)
    }

    pub fn write_jsonl(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let degrees: Vec<usize> = self.poly.histogram.keys().rev().copied().collect();
        let obj = json!({
            "pattern": self.pattern,
            "degrees": degrees,
            "counts": self.poly.raw_counts(),
            "normalization": self.poly.normalization,
            "polynomial": self.poly.to_string(),
        });
        writeln!(out, "{obj}")
    }
}

pub fn loops(a: &LoopsArgs) -> Result<LoopReport> {
    let (pattern, poly) = match a.pattern {
        PatternKind::NormalTt => ("normal-tt", normal_invariant_via_loops(NormalInvariant::Tt)),
        PatternKind::NormalTdtd => ("normal-tdtd", normal_invariant_via_loops(NormalInvariant::TdTd)),
        PatternKind::Custom => {
            let path = a.pattern_file.as_ref().context("--pattern custom needs --pattern-file")?;
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ("custom", enumerate_pattern(&parse_pattern(&text)?)?)
        }
    };
    Ok(LoopReport { pattern, poly })
}
