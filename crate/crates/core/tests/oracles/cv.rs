use std::collections::BTreeMap;

use chunkqe::eval::{grid_search, FoldPlan, GridCell, Metric, PrecomputedGrid, Qrels};
use chunkqe::{RankedList, Run};

use super::Check;

pub fn check_round_robin() -> Check {
    let mut ids: Vec<String> = (701..=850).map(|i| i.to_string()).collect();
    ids.reverse();
    ids.swap(3, 77);
    let plan = FoldPlan::round_robin(&ids).map_err(|e| e.to_string())?;
    for id in 701..=850u32 {
        let want = ((id - 701) % 5) as usize;
        let got = plan.fold_of(&id.to_string());
        ensure!(got == Some(want), "query {id} in fold {got:?}, expected {want}");
    }
    Ok(())
}

pub const QUERIES: std::ops::RangeInclusive<u32> = 701..=726;

/// Rank (0-based) of the single relevant document for a query at a cell.
/// Only four distinct positions, so many cells tie.
pub fn relevant_position(q: u32, cell: GridCell) -> usize {
    let h = q
        .wrapping_mul(2_654_435_761)
        .wrapping_add(u32::from(cell.alpha_tenths) * 97 + u32::from(cell.beta_tenths) * 13);
    ((h >> 7) % 4) as usize
}

pub fn grid_fixture() -> (PrecomputedGrid, Qrels, Vec<String>) {
    let mut qrels = Qrels::new();
    for q in QUERIES {
        qrels.insert(&q.to_string(), "rel", 1).unwrap();
    }
    let mut runs = BTreeMap::new();
    for cell in GridCell::grid() {
        let lists = QUERIES
            .map(|q| {
                let mut ids: Vec<String> = (0..10).map(|i| format!("n{i}")).collect();
                ids.insert(relevant_position(q, cell), "rel".into());
                RankedList::from_scores(
                    q.to_string(),
                    ids.into_iter().enumerate().map(|(i, d)| (d, 100.0 - i as f64)).collect(),
                )
            })
            .collect();
        runs.insert(cell, Run::new(lists));
    }
    let ids = QUERIES.map(|q| q.to_string()).collect();
    (PrecomputedGrid { runs }, qrels, ids)
}

/// NDCG with a single relevant document at 0-based position `pos`.
pub fn oracle_ndcg(pos: usize) -> f64 {
    1.0 / (pos as f64 + 2.0).log2()
}

/// Exhaustive argmax over all 81 cells; the first maximum in (alpha, beta)
/// order wins.
pub fn oracle_best(queries: &[String]) -> (GridCell, f64) {
    let mut best: Option<(GridCell, f64)> = None;
    for a in 1..=9u8 {
        for b in 1..=9u8 {
            let cell = GridCell::new(a, b);
            let mean = queries
                .iter()
                .map(|q| oracle_ndcg(relevant_position(q.parse().unwrap(), cell)))
                .sum::<f64>()
                / queries.len() as f64;
            match best {
                Some((_, s)) if mean <= s => {}
                _ => best = Some((cell, mean)),
            }
        }
    }
    best.unwrap()
}

pub fn check_grid_search() -> Check {
    let (grid, qrels, ids) = grid_fixture();
    let plan = FoldPlan::round_robin(&ids).map_err(|e| e.to_string())?;
    for f in 0..5 {
        let got = grid_search(&grid, plan.fold(f), &qrels, Metric::Ndcg(20)).map_err(|e| e.to_string())?;
        let (cell, score) = oracle_best(plan.fold(f));
        ensure!(got.cell == cell, "fold {f}: chose {:?}, oracle {cell:?}", got.cell);
        ensure!((got.score - score).abs() < 1e-12, "fold {f}: score {} vs {score}", got.score);
    }
    Ok(())
}
