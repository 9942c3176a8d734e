//! Straight-line reference implementations of the fitness costs.

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// All other instances ordered by distance from `i`, ties by index.
pub fn ordering(rows: &[Vec<f64>], i: usize) -> Vec<usize> {
    let mut others: Vec<usize> = (0..rows.len()).filter(|&j| j != i).collect();
    others.sort_by(|&a, &b| {
        dist(&rows[i], &rows[a])
            .partial_cmp(&dist(&rows[i], &rows[b]))
            .unwrap()
            .then(a.cmp(&b))
    });
    others
}

pub fn footrule_oracle(data: &[Vec<f64>], emb: &[Vec<f64>], pick: impl Fn(&[usize]) -> Vec<usize>) -> f64 {
    let n = data.len();
    let mut total = 0.0;
    let mut k = 0;
    for i in 0..n {
        let reference = pick(&ordering(data, i));
        k = reference.len();
        let mut by_emb = reference.clone();
        by_emb.sort_by(|&a, &b| {
            dist(&emb[i], &emb[a])
                .partial_cmp(&dist(&emb[i], &emb[b]))
                .unwrap()
                .then(a.cmp(&b))
        });
        for (pos, j) in reference.iter().enumerate() {
            let r = by_emb.iter().position(|x| x == j).unwrap();
            total += (pos as f64 - r as f64).abs();
        }
    }
    let max = (k * k / 2) as f64;
    if max == 0.0 {
        0.0
    } else {
        total / max / n as f64
    }
}

pub fn gpmal_oracle(data: &[Vec<f64>], emb: &[Vec<f64>]) -> f64 {
    let k = (data.len() - 1).min(15);
    footrule_oracle(data, emb, |o| o[..k].to_vec())
}

pub fn gpmal2_oracle(data: &[Vec<f64>], emb: &[Vec<f64>]) -> f64 {
    footrule_oracle(data, emb, |o| {
        let mut picked = Vec::new();
        let mut p = 1;
        while p <= o.len() {
            picked.push(o[p - 1]);
            p *= 2;
        }
        picked
    })
}

pub fn nrmse_oracle(data: &[Vec<f64>], emb: &[Vec<f64>]) -> f64 {
    let n = data.len();
    let mut diffs = Vec::new();
    let mut orig = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let d = dist(&data[i], &data[j]);
            orig.push(d);
            diffs.push(d - dist(&emb[i], &emb[j]));
        }
    }
    let rmse = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt();
    let hi = orig.iter().cloned().fold(f64::MIN, f64::max);
    let lo = orig.iter().cloned().fold(f64::MAX, f64::min);
    if hi - lo > 0.0 {
        rmse / (hi - lo)
    } else {
        rmse
    }
}
