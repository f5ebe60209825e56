//! Cohen's kappa from the full contingency table in exact rational
//! arithmetic.

use num_rational::Ratio;

type Q = Ratio<i128>;

/// Kappa over `(a, b)` category pairs in `0..=2`, or `None` when chance
/// agreement is already perfect. `linear` uses agreement weights
/// `1 - |i - j| / 2`.
pub fn kappa(pairs: &[(u8, u8)], linear: bool) -> Option<Q> {
    let n = pairs.len() as i128;
    let mut table = [[0i128; 3]; 3];
    for &(a, b) in pairs {
        table[a as usize][b as usize] += 1;
    }
    let weight = |i: usize, j: usize| -> Q {
        if linear {
            Q::from_integer(1) - Q::new((i as i128 - j as i128).abs(), 2)
        } else if i == j {
            Q::from_integer(1)
        } else {
            Q::from_integer(0)
        }
    };
    let mut p_o = Q::from_integer(0);
    let mut p_e = Q::from_integer(0);
    for i in 0..3 {
        let row: i128 = table[i].iter().sum();
        for j in 0..3 {
            let col: i128 = (0..3).map(|r| table[r][j]).sum();
            p_o += weight(i, j) * Q::new(table[i][j], n);
            p_e += weight(i, j) * Q::new(row, n) * Q::new(col, n);
        }
    }
    let one = Q::from_integer(1);
    if p_e == one {
        return None;
    }
    Some((p_o - p_e) / (one - p_e))
}

pub fn to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_table() {
        // 2x2 classic: 20 yes/yes, 5 yes/no, 10 no/yes, 15 no/no -> 0.4
        let mut pairs = vec![(1, 1); 20];
        pairs.extend(vec![(1, 0); 5]);
        pairs.extend(vec![(0, 1); 10]);
        pairs.extend(vec![(0, 0); 15]);
        assert_eq!(kappa(&pairs, false), Some(Q::new(2, 5)));
        assert_eq!(kappa(&[(1, 1), (1, 1)], false), None);
    }
}
