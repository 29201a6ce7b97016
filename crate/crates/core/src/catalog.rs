//! Built-in test problems with analytically known solutions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::problem::{Problem, Provenance, ReferenceValue};
use crate::solver::SolveStatus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tag {
    Feasible,
    Infeasible,
    Unconstrained,
    /// Every constraint is active at the start.
    Degenerate,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub problem: Problem,
    pub x0: Vec<f64>,
    pub expected_status: SolveStatus,
    pub reference_f: Option<ReferenceValue>,
    pub reference_v: Option<f64>,
    /// A minimizer, when one is known in closed form.
    pub reference_x: Option<Vec<f64>>,
    pub tags: Vec<Tag>,
}

impl CatalogEntry {
    pub fn name(&self) -> &str {
        self.problem.name()
    }

    pub fn is_feasible(&self) -> bool {
        self.tags.contains(&Tag::Feasible)
    }

    pub fn with_start(mut self, x0: Vec<f64>) -> Self {
        assert_eq!(x0.len(), self.problem.dim());
        self.x0 = x0;
        self
    }
}

fn feasible(problem: Problem, x0: Vec<f64>, x_star: Vec<f64>, tags: &[Tag]) -> CatalogEntry {
    let mut all = vec![Tag::Feasible];
    all.extend_from_slice(tags);
    CatalogEntry {
        reference_f: problem.known_optimum(),
        problem,
        x0,
        expected_status: SolveStatus::KktSuccess,
        reference_v: Some(0.0),
        reference_x: Some(x_star),
        tags: all,
    }
}

fn quadratic() -> CatalogEntry {
    let p = Problem::builder("quadratic", 2)
        .objective(
            |x| x[0] * x[0] + x[1] * x[1],
            |x| vec![2.0 * x[0], 2.0 * x[1]],
        )
        .known_optimum(0.0, Provenance::Analytic)
        .build();
    feasible(p, vec![1.0, -2.0], vec![0.0, 0.0], &[Tag::Unconstrained])
}

fn circle() -> CatalogEntry {
    let p = Problem::builder("circle", 2)
        .objective(|x| x[0] + x[1], |_| vec![1.0, 1.0])
        .inequality(
            |x| x[0] * x[0] + x[1] * x[1] - 2.0,
            |x| vec![2.0 * x[0], 2.0 * x[1]],
        )
        .known_optimum(-2.0, Provenance::Analytic)
        .build();
    feasible(p, vec![0.5, 1.0], vec![-1.0, -1.0], &[])
}

fn infeasible() -> CatalogEntry {
    let problem = Problem::builder("infeasible", 1)
        .objective(|x| x[0], |_| vec![1.0])
        .inequality(|x| x[0] * x[0] + 1.0, |x| vec![2.0 * x[0]])
        .build();
    CatalogEntry {
        problem,
        x0: vec![3.0],
        expected_status: SolveStatus::InfeasibleStationary,
        reference_f: None,
        reference_v: Some(1.0),
        reference_x: Some(vec![0.0]),
        tags: vec![Tag::Infeasible],
    }
}

fn degenerate() -> CatalogEntry {
    let p = Problem::builder("degenerate", 2)
        .objective(
            |x| (x[0] - 2.0).powi(2) + (x[1] - 1.0).powi(2),
            |x| vec![2.0 * (x[0] - 2.0), 2.0 * (x[1] - 1.0)],
        )
        .equality(|x| x[0] - x[1], |_| vec![1.0, -1.0])
        .inequality(|x| -x[0], |_| vec![-1.0, 0.0])
        .known_optimum(0.5, Provenance::Analytic)
        .build();
    feasible(p, vec![0.0, 0.0], vec![1.5, 1.5], &[Tag::Degenerate])
}

fn hs6() -> CatalogEntry {
    let p = Problem::builder("hs6", 2)
        .objective(|x| (1.0 - x[0]).powi(2), |x| vec![-2.0 * (1.0 - x[0]), 0.0])
        .equality(
            |x| 10.0 * (x[1] - x[0] * x[0]),
            |x| vec![-20.0 * x[0], 10.0],
        )
        .known_optimum(0.0, Provenance::Analytic)
        .build();
    feasible(p, vec![-1.2, 1.0], vec![1.0, 1.0], &[])
}

fn hs7() -> CatalogEntry {
    let p = Problem::builder("hs7", 2)
        .objective(
            |x| (1.0 + x[0] * x[0]).ln() - x[1],
            |x| vec![2.0 * x[0] / (1.0 + x[0] * x[0]), -1.0],
        )
        .equality(
            |x| (1.0 + x[0] * x[0]).powi(2) + x[1] * x[1] - 4.0,
            |x| vec![4.0 * x[0] * (1.0 + x[0] * x[0]), 2.0 * x[1]],
        )
        .known_optimum(-(3f64.sqrt()), Provenance::Analytic)
        .build();
    feasible(p, vec![2.0, 2.0], vec![0.0, 3f64.sqrt()], &[])
}

fn hs8() -> CatalogEntry {
    let p = Problem::builder("hs8", 2)
        .objective(|_| -1.0, |_| vec![0.0, 0.0])
        .equality(
            |x| x[0] * x[0] + x[1] * x[1] - 25.0,
            |x| vec![2.0 * x[0], 2.0 * x[1]],
        )
        .equality(|x| x[0] * x[1] - 9.0, |x| vec![x[1], x[0]])
        .known_optimum(-1.0, Provenance::Analytic)
        .build();
    let (s, t) = (43f64.sqrt(), 7f64.sqrt());
    feasible(p, vec![2.0, 1.0], vec![(s + t) / 2.0, (s - t) / 2.0], &[])
}

fn hs9() -> CatalogEntry {
    let p = Problem::builder("hs9", 2)
        .objective(
            |x| (PI * x[0] / 12.0).sin() * (PI * x[1] / 16.0).cos(),
            |x| {
                let (a, b) = (PI * x[0] / 12.0, PI * x[1] / 16.0);
                vec![
                    PI / 12.0 * a.cos() * b.cos(),
                    -PI / 16.0 * a.sin() * b.sin(),
                ]
            },
        )
        .equality(|x| 4.0 * x[0] - 3.0 * x[1], |_| vec![4.0, -3.0])
        .known_optimum(-0.5, Provenance::Analytic)
        .build();
    feasible(p, vec![0.0, 0.0], vec![-3.0, -4.0], &[Tag::Degenerate])
}

fn hs10() -> CatalogEntry {
    let p = Problem::builder("hs10", 2)
        .objective(|x| x[0] - x[1], |_| vec![1.0, -1.0])
        .inequality(
            |x| 3.0 * x[0] * x[0] - 2.0 * x[0] * x[1] + x[1] * x[1] - 1.0,
            |x| vec![6.0 * x[0] - 2.0 * x[1], -2.0 * x[0] + 2.0 * x[1]],
        )
        .known_optimum(-1.0, Provenance::Analytic)
        .build();
    feasible(p, vec![-10.0, 10.0], vec![0.0, 1.0], &[])
}

fn hs12() -> CatalogEntry {
    let p = Problem::builder("hs12", 2)
        .objective(
            |x| 0.5 * x[0] * x[0] + x[1] * x[1] - x[0] * x[1] - 7.0 * x[0] - 7.0 * x[1],
            |x| vec![x[0] - x[1] - 7.0, 2.0 * x[1] - x[0] - 7.0],
        )
        .inequality(
            |x| 4.0 * x[0] * x[0] + x[1] * x[1] - 25.0,
            |x| vec![8.0 * x[0], 2.0 * x[1]],
        )
        .known_optimum(-30.0, Provenance::Analytic)
        .build();
    feasible(p, vec![0.0, 0.0], vec![2.0, 3.0], &[])
}

fn hs28() -> CatalogEntry {
    let p = Problem::builder("hs28", 3)
        .objective(
            |x| (x[0] + x[1]).powi(2) + (x[1] + x[2]).powi(2),
            |x| {
                let (a, b) = (x[0] + x[1], x[1] + x[2]);
                vec![2.0 * a, 2.0 * (a + b), 2.0 * b]
            },
        )
        .equality(
            |x| x[0] + 2.0 * x[1] + 3.0 * x[2] - 1.0,
            |_| vec![1.0, 2.0, 3.0],
        )
        .known_optimum(0.0, Provenance::Analytic)
        .build();
    feasible(p, vec![-4.0, 1.0, 1.0], vec![0.5, -0.5, 0.5], &[])
}

fn hs35() -> CatalogEntry {
    let mut b = Problem::builder("hs35", 3)
        .objective(
            |x| {
                9.0 - 8.0 * x[0] - 6.0 * x[1] - 4.0 * x[2]
                    + 2.0 * x[0] * x[0]
                    + 2.0 * x[1] * x[1]
                    + x[2] * x[2]
                    + 2.0 * x[0] * x[1]
                    + 2.0 * x[0] * x[2]
            },
            |x| {
                vec![
                    -8.0 + 4.0 * x[0] + 2.0 * x[1] + 2.0 * x[2],
                    -6.0 + 4.0 * x[1] + 2.0 * x[0],
                    -4.0 + 2.0 * x[2] + 2.0 * x[0],
                ]
            },
        )
        .inequality(|x| x[0] + x[1] + 2.0 * x[2] - 3.0, |_| vec![1.0, 1.0, 2.0]);
    for i in 0..3 {
        b = b.inequality(
            move |x| -x[i],
            move |_| {
                let mut g = vec![0.0; 3];
                g[i] = -1.0;
                g
            },
        );
    }
    let p = b.known_optimum(1.0 / 9.0, Provenance::Analytic).build();
    feasible(
        p,
        vec![0.5, 0.5, 0.5],
        vec![4.0 / 3.0, 7.0 / 9.0, 4.0 / 9.0],
        &[],
    )
}

fn hs48() -> CatalogEntry {
    let p = Problem::builder("hs48", 5)
        .objective(
            |x| (x[0] - 1.0).powi(2) + (x[1] - x[2]).powi(2) + (x[3] - x[4]).powi(2),
            |x| {
                let (a, b) = (x[1] - x[2], x[3] - x[4]);
                vec![2.0 * (x[0] - 1.0), 2.0 * a, -2.0 * a, 2.0 * b, -2.0 * b]
            },
        )
        .equality(|x| x.iter().sum::<f64>() - 5.0, |_| vec![1.0; 5])
        .equality(
            |x| x[2] - 2.0 * (x[3] + x[4]) + 3.0,
            |_| vec![0.0, 0.0, 1.0, -2.0, -2.0],
        )
        .known_optimum(0.0, Provenance::Analytic)
        .build();
    feasible(p, vec![3.0, 5.0, -3.0, 2.0, -2.0], vec![1.0; 5], &[])
}

/// All built-in problems, in a fixed order.
pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        quadratic(),
        hs6(),
        circle(),
        infeasible(),
        degenerate(),
        hs7(),
        hs8(),
        hs9(),
        hs10(),
        hs12(),
        hs28(),
        hs35(),
        hs48(),
    ]
}

pub fn find(name: &str) -> Option<CatalogEntry> {
    catalog().into_iter().find(|e| e.name() == name)
}
