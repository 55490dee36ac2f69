use super::{fold, FreeAut, SubgroupGraph, Word};
use crate::error::{domain_err, Error, Result};

pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

/// Where a congruence kernel lives: a whole free group of the given rank or a
/// finitely generated subgroup of one.
#[derive(Clone, Copy, Debug)]
pub enum Ambient<'a> {
    Free(usize),
    Subgroup(&'a SubgroupGraph),
}

/// All transitive right actions of the free group of rank `rank` on at most
/// `max_points` points with base point 0, up to relabelling of the other
/// points, i.e. one per subgroup of index at most `max_points`.
///
/// Actions are built as coset tables in standard form: entries are filled in
/// the order (point, generator, direction) and a fresh point always gets the
/// next unused number, so every subgroup appears exactly once.
pub fn transitive_actions(rank: usize, max_points: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out_tab = vec![vec![None; rank]; max_points.max(1)];
    let mut in_tab = vec![vec![None; rank]; max_points.max(1)];
    let mut found = Vec::new();
    if max_points == 0 {
        return found;
    }
    extend_tables(rank, max_points, 1, &mut out_tab, &mut in_tab, &mut found);
    found
}

type Table = Vec<Vec<Option<usize>>>;

fn extend_tables(rank: usize, cap: usize, used: usize, out_tab: &mut Table, in_tab: &mut Table, found: &mut Vec<Vec<Vec<usize>>>) {
    let hole = (0..used).flat_map(|p| (0..rank).flat_map(move |g| [(p, g, false), (p, g, true)])).find(|&(p, g, inv)| {
        if inv {
            in_tab[p][g].is_none()
        } else {
            out_tab[p][g].is_none()
        }
    });
    let Some((p, g, inv)) = hole else {
        found.push((0..rank).map(|g| (0..used).map(|p| out_tab[p][g].unwrap()).collect()).collect());
        return;
    };
    let fresh = if used < cap { Some(used) } else { None };
    for t in (0..used).chain(fresh) {
        let (src, dst) = if inv { (t, p) } else { (p, t) };
        if out_tab[src][g].is_some() || in_tab[dst][g].is_some() {
            continue;
        }
        out_tab[src][g] = Some(dst);
        in_tab[dst][g] = Some(src);
        let next_used = if t == used { used + 1 } else { used };
        extend_tables(rank, cap, next_used, out_tab, in_tab, found);
        out_tab[src][g] = None;
        in_tab[dst][g] = None;
    }
}

/// Intersection of all subgroups of index at most `m` of the ambient group.
/// For a subgroup ambient the computation runs in a free basis of the
/// subgroup and is mapped back. Fails with a resource error when an
/// intermediate fiber product would exceed `budget` states.
pub fn congruence_kernel(ambient: Ambient<'_>, m: usize, budget: usize) -> Result<SubgroupGraph> {
    if m == 0 {
        return domain_err("congruence depth must be positive");
    }
    match ambient {
        Ambient::Free(rank) => free_kernel(rank, m, budget),
        Ambient::Subgroup(h) => {
            let basis = h.generators();
            if basis.is_empty() {
                return Ok(SubgroupGraph::trivial(h.rank()));
            }
            let inner = free_kernel(basis.len(), m, budget)?;
            let gens: Vec<Word> = inner.generators().iter().map(|w| w.substitute(&basis)).collect();
            fold(h.rank(), &gens)
        }
    }
}

fn free_kernel(rank: usize, m: usize, budget: usize) -> Result<SubgroupGraph> {
    let mut acc = SubgroupGraph::whole(rank);
    for action in transitive_actions(rank, m) {
        let h = SubgroupGraph::from_action(&action);
        acc = acc
            .intersect_with_budget(&h, budget)
            .map_err(|_| Error::Resource(format!("congruence kernel at depth {m} exceeds the state budget of {budget}")))?;
    }
    Ok(acc)
}

/// Whether every automorphism in `auts` maps the finite-index subgroup `h`
/// into itself. For finite index this is equivalent to invariance.
/// Characteristic when `auts` generates the automorphism group.
pub fn is_characteristic(h: &SubgroupGraph, auts: &[FreeAut]) -> Result<bool> {
    if !h.is_complete() {
        return domain_err("characteristic test needs a finite-index subgroup");
    }
    let gens = h.generators();
    Ok(auts.iter().all(|a| gens.iter().all(|w| h.contains(&a.apply(w)))))
}
