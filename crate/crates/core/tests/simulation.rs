use unfriendly_core::stats::chi_square;
use unfriendly_core::{build_config, exact_distribution, simulate, Family, FamilyTag, SeatGrid, SelectionMode};

const TRIALS: usize = 100_000;
const ALPHA: f64 = 1e-3;

fn small_grids() -> Vec<(String, SeatGrid)> {
    let mut out: Vec<(String, SeatGrid)> = [
        (FamilyTag::X, 4),
        (FamilyTag::Y, 4),
        (FamilyTag::A, 3),
        (FamilyTag::B, 3),
        (FamilyTag::Z, 8),
    ]
    .into_iter()
    .map(|(tag, n)| (format!("{tag}_{n}"), build_config(Family::new(tag, n))))
    .collect();
    for text in [".O\nOOO", "OO\nOOO", "O\n.O", "OO.O\nO.OO", "OOOO\n.O.O"] {
        out.push((text.replace('\n', "/"), SeatGrid::parse(text).unwrap()));
    }
    out
}

#[test]
fn both_selection_modes_match_the_oracle() {
    for (i, (name, grid)) in small_grids().into_iter().enumerate() {
        assert!(grid.len() <= 8);
        let law = exact_distribution(&grid).unwrap();
        for (j, mode) in [SelectionMode::UniformFree, SelectionMode::Retry].into_iter().enumerate() {
            let sim = simulate(&grid, TRIALS, 1000 + (2 * i + j) as u64, mode).unwrap();
            let test = chi_square(&sim.histogram, &law);
            assert!(test.passes(ALPHA), "{name} {mode:?}: {test:?}");
        }
    }
}
