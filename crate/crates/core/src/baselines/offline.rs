//! Offline optimum: a maximum-weight matching between buyers and sellers
//! whose presence windows overlap, weighted by the surplus `w_b + w_s`.

use super::Trade;
use crate::market::{AgentId, AgentType, Money, Side};

fn overlaps(a: &AgentType, b: &AgentType) -> bool {
    a.arrival <= b.departure && b.arrival <= a.departure
}

fn surplus(b: &AgentType, s: &AgentType) -> Money {
    if overlaps(b, s) {
        (b.value + s.value).max(0.0)
    } else {
        0.0
    }
}

/// Value of the optimal matching and its pairs.
pub fn optimum(schedule: &[AgentType]) -> (Money, Vec<(AgentId, AgentId)>) {
    let buyers: Vec<&AgentType> = schedule.iter().filter(|a| a.side == Side::Buyer).collect();
    let sellers: Vec<&AgentType> = schedule.iter().filter(|a| a.side == Side::Seller).collect();

    // Split into connected components of the positive-surplus graph.
    let n = buyers.len() + sellers.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (i, b) in buyers.iter().enumerate() {
        for (j, s) in sellers.iter().enumerate() {
            if surplus(b, s) > 0.0 {
                let (x, y) = (find(&mut parent, i), find(&mut parent, buyers.len() + j));
                parent[x] = y;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
    for i in 0..buyers.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().0.push(i);
    }
    for j in 0..sellers.len() {
        let r = find(&mut parent, buyers.len() + j);
        groups.entry(r).or_default().1.push(j);
    }

    let mut total = 0.0;
    let mut pairs = Vec::new();
    for (bs, ss) in groups.values() {
        if bs.is_empty() || ss.is_empty() {
            continue;
        }
        let w: Vec<Vec<Money>> =
            bs.iter().map(|&i| ss.iter().map(|&j| surplus(buyers[i], sellers[j])).collect()).collect();
        for (r, c) in max_weight_assignment(&w).into_iter().enumerate() {
            if let Some(c) = c {
                if w[r][c] > 0.0 {
                    total += w[r][c];
                    pairs.push((buyers[bs[r]].id, sellers[ss[c]].id));
                }
            }
        }
    }
    pairs.sort();
    (total, pairs)
}

/// Maximum-weight assignment on a dense non-negative weight matrix
/// (Hungarian algorithm with potentials). Returns the column of each row.
pub fn max_weight_assignment(w: &[Vec<Money>]) -> Vec<Option<usize>> {
    let rows = w.len();
    let cols = w.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return vec![None; rows];
    }
    if rows > cols {
        let t: Vec<Vec<Money>> = (0..cols).map(|c| (0..rows).map(|r| w[r][c]).collect()).collect();
        let by_col = max_weight_assignment(&t);
        let mut out = vec![None; rows];
        for (c, r) in by_col.into_iter().enumerate() {
            if let Some(r) = r {
                out[r] = Some(c);
            }
        }
        return out;
    }
    // Minimize -w over rows <= cols; 1-based arrays with a sentinel column 0.
    let (n, m) = (rows, cols);
    let inf = Money::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = -w[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![None; n];
    for j in 1..=m {
        if p[j] != 0 {
            out[p[j] - 1] = Some(j - 1);
        }
    }
    out
}

/// The optimal matching as trades at the midpoint, in the later arrival period.
pub fn trades(schedule: &[AgentType]) -> Vec<Trade> {
    let (_, pairs) = optimum(schedule);
    let find = |id: AgentId| schedule.iter().find(|a| a.id == id).expect("pair ids come from the schedule");
    pairs
        .into_iter()
        .map(|(b, s)| {
            let (b, s) = (find(b), find(s));
            let p = (b.value - s.value) / 2.0;
            Trade { period: b.arrival.max(s.arrival), buyer: b.id, seller: s.id, buyer_payment: p, seller_payment: -p }
        })
        .collect()
}
