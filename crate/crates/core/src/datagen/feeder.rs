//! Radial feeder model and backward/forward sweep power flow.

use std::collections::HashMap;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::zip::{zip_power, ZipParams};

/// A spot load, kW / kvar.
#[derive(Debug, Clone, Copy)]
pub struct Bus {
    pub id: usize,
    pub p_kw: f64,
    pub q_kvar: f64,
}

/// A series branch, ohms.
#[derive(Debug, Clone, Copy)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    pub r_ohm: f64,
    pub x_ohm: f64,
}

/// Radial distribution feeder: a branch tree rooted at the slack bus plus
/// per-bus spot loads.
///
/// Internally buses are stored in breadth-first order from the slack, which
/// makes both sweep directions simple index scans.
#[derive(Debug, Clone)]
pub struct FeederModel {
    /// External bus ids in BFS order; index 0 is the slack.
    ids: Vec<usize>,
    /// Parent dense index per bus (slack entry unused).
    parent: Vec<usize>,
    /// Branch impedance from parent, p.u. (slack entry zero).
    z_pu: Vec<Complex64>,
    /// Spot load per bus, p.u.
    s_pu: Vec<Complex64>,
    index: HashMap<usize, usize>,
    pub slack_voltage: f64,
    pub base_kv: f64,
    pub base_mva: f64,
}

impl FeederModel {
    pub fn new(
        branches: Vec<Branch>,
        loads: Vec<Bus>,
        slack_voltage: f64,
        base_kv: f64,
        base_mva: f64,
    ) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidParameter("feeder has no branches".into()));
        }
        if slack_voltage <= 0.0 || base_kv <= 0.0 || base_mva <= 0.0 {
            return Err(Error::InvalidParameter(
                "slack voltage and base values must be positive".into(),
            ));
        }
        for b in &branches {
            if b.r_ohm < 0.0 || b.x_ohm < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "branch {}-{} has negative impedance",
                    b.from, b.to
                )));
            }
        }

        // the root is the unique bus that never appears as a branch head
        let mut seen = HashMap::new();
        for b in &branches {
            seen.entry(b.from).or_insert(false);
            if seen.insert(b.to, true) == Some(true) {
                return Err(Error::InvalidParameter(format!(
                    "bus {} has two parents; feeder is not a tree",
                    b.to
                )));
            }
        }
        let mut roots: Vec<usize> = seen
            .iter()
            .filter(|(_, &is_child)| !is_child)
            .map(|(&id, _)| id)
            .collect();
        if roots.len() != 1 {
            roots.sort_unstable();
            return Err(Error::InvalidParameter(format!(
                "feeder must have exactly one root bus, found {roots:?}"
            )));
        }
        let root = roots[0];

        // breadth-first ordering from the root
        let mut children: HashMap<usize, Vec<&Branch>> = HashMap::new();
        for b in &branches {
            children.entry(b.from).or_default().push(b);
        }
        let zbase = base_kv * base_kv / base_mva;
        let mut ids = vec![root];
        let mut parent = vec![0usize];
        let mut z_pu = vec![Complex64::new(0.0, 0.0)];
        let mut index = HashMap::from([(root, 0usize)]);
        let mut frontier = vec![root];
        while let Some(bus) = frontier.pop() {
            let Some(outgoing) = children.get(&bus) else { continue };
            for b in outgoing {
                if index.contains_key(&b.to) {
                    return Err(Error::InvalidParameter(format!(
                        "bus {} reached twice; feeder is not a tree",
                        b.to
                    )));
                }
                index.insert(b.to, ids.len());
                ids.push(b.to);
                parent.push(index[&bus]);
                z_pu.push(Complex64::new(b.r_ohm, b.x_ohm) / zbase);
                frontier.push(b.to);
            }
        }
        if ids.len() != branches.len() + 1 {
            return Err(Error::InvalidParameter(
                "feeder branch graph is not connected".into(),
            ));
        }

        let mut s_pu = vec![Complex64::new(0.0, 0.0); ids.len()];
        for l in &loads {
            let Some(&k) = index.get(&l.id) else {
                return Err(Error::InvalidParameter(format!(
                    "load at bus {} which is not in the branch graph",
                    l.id
                )));
            };
            if s_pu[k] != Complex64::new(0.0, 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate load row for bus {}",
                    l.id
                )));
            }
            s_pu[k] = Complex64::new(l.p_kw, l.q_kvar) / (1000.0 * base_mva);
        }

        Ok(FeederModel {
            ids,
            parent,
            z_pu,
            s_pu,
            index,
            slack_voltage,
            base_kv,
            base_mva,
        })
    }

    /// Parses the plain-text table: `from,to,r_ohm,x_ohm` branch rows (4
    /// fields), `id,p_kw,q_kvar` load rows (3 fields), `#` comments.
    pub fn parse(text: &str, slack_voltage: f64, base_kv: f64, base_mva: f64) -> Result<Self> {
        let mut branches = Vec::new();
        let mut loads = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parse_f = |s: &str| -> Result<f64> {
                s.parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    msg: format!("bad number {s:?}"),
                })
            };
            let parse_u = |s: &str| -> Result<usize> {
                s.parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    msg: format!("bad bus id {s:?}"),
                })
            };
            match fields.len() {
                4 => branches.push(Branch {
                    from: parse_u(fields[0])?,
                    to: parse_u(fields[1])?,
                    r_ohm: parse_f(fields[2])?,
                    x_ohm: parse_f(fields[3])?,
                }),
                3 => loads.push(Bus {
                    id: parse_u(fields[0])?,
                    p_kw: parse_f(fields[1])?,
                    q_kvar: parse_f(fields[2])?,
                }),
                n => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: format!("expected 3 or 4 fields, got {n}"),
                    })
                }
            }
        }
        FeederModel::new(branches, loads, slack_voltage, base_kv, base_mva)
    }

    pub fn from_file(path: &Path, slack_voltage: f64, base_kv: f64, base_mva: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        FeederModel::parse(&text, slack_voltage, base_kv, base_mva)
    }

    /// The bundled 33-bus case (12.66 kV, 10 MVA, slack at 1.0 p.u.).
    pub fn ieee33() -> Self {
        FeederModel::parse(include_str!("../../data/ieee33.csv"), 1.0, 12.66, 10.0)
            .expect("bundled feeder table is valid")
    }

    pub fn n_buses(&self) -> usize {
        self.ids.len()
    }

    /// Bus ids in the internal (BFS) order used by power-flow results.
    pub fn bus_ids(&self) -> &[usize] {
        &self.ids
    }

    /// Dense index of an external bus id.
    pub fn index_of(&self, bus: usize) -> Result<usize> {
        self.index
            .get(&bus)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("no bus {bus} in feeder")))
    }

    /// Nominal complex load at a bus, p.u.
    pub fn load_pu(&self, bus: usize) -> Result<(f64, f64)> {
        let k = self.index_of(bus)?;
        Ok((self.s_pu[k].re, self.s_pu[k].im))
    }

    pub fn branches(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (1..self.ids.len()).map(|k| (self.ids[self.parent[k]], self.ids[k], self.z_pu[k]))
    }

    /// Copy of the feeder with every load scaled by `factor`, except the
    /// optional excluded bus which keeps its nominal load.
    pub fn scale_loads(&self, factor: f64, except: Option<usize>) -> FeederModel {
        let mut scaled = self.clone();
        let keep = except.and_then(|b| self.index.get(&b).copied());
        for (k, s) in scaled.s_pu.iter_mut().enumerate() {
            if Some(k) != keep {
                *s *= factor;
            }
        }
        scaled
    }
}

/// Voltage-dependent load replacing the spot load at one bus: the consumed
/// power is `nominal · zip_power(params, |V|/v0)` on both P and Q.
#[derive(Debug, Clone, Copy)]
pub struct ZipLoad {
    pub bus: usize,
    pub params: ZipParams,
    /// Reference voltage V₀ (p.u.), typically from the unscaled base case.
    pub v0: f64,
}

/// Backward/forward sweep power flow; returns voltage magnitudes (p.u.) in
/// `feeder.bus_ids()` order.
///
/// Convergence is declared when the worst per-bus complex-power mismatch
/// drops below `tol`. With `zip_at` set, that bus's injection is re-evaluated
/// from the current voltage inside every sweep, so the returned solution is
/// the joint fixed point of network and ZIP load.
pub fn power_flow(
    feeder: &FeederModel,
    zip_at: Option<&ZipLoad>,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    if tol <= 0.0 || max_iter == 0 {
        return Err(Error::InvalidParameter(
            "power flow needs tol > 0 and max_iter >= 1".into(),
        ));
    }
    let n = feeder.n_buses();
    let zip_idx = match zip_at {
        Some(z) => {
            if z.v0 <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "ZIP reference voltage must be positive, got {}",
                    z.v0
                )));
            }
            Some(feeder.index_of(z.bus)?)
        }
        None => None,
    };

    // complex load at bus k given its current voltage magnitude
    let s_at = |k: usize, vmag: f64| -> Result<Complex64> {
        if let (Some(zk), Some(z)) = (zip_idx, zip_at) {
            if k == zk {
                let f = zip_power(&z.params, vmag / z.v0)?;
                return Ok(feeder.s_pu[k] * f);
            }
        }
        Ok(feeder.s_pu[k])
    };

    let slack = Complex64::new(feeder.slack_voltage, 0.0);
    let mut v = vec![slack; n];
    let mut i_inj = vec![Complex64::new(0.0, 0.0); n];
    let mut i_br = vec![Complex64::new(0.0, 0.0); n];
    let mut mismatch = f64::INFINITY;

    for _ in 0..max_iter {
        // injection currents from present voltages
        for k in 1..n {
            let s = s_at(k, v[k].norm())?;
            i_inj[k] = (s / v[k]).conj();
        }
        // backward: aggregate subtree currents into each branch
        i_br[..n].copy_from_slice(&i_inj);
        for k in (1..n).rev() {
            let p = feeder.parent[k];
            if p != 0 {
                let add = i_br[k];
                i_br[p] += add;
            }
        }
        // forward: voltage drops from the slack outward
        for k in 1..n {
            v[k] = v[feeder.parent[k]] - feeder.z_pu[k] * i_br[k];
        }
        if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonConvergence {
                iters: max_iter,
                mismatch: f64::INFINITY,
            });
        }
        // per-bus complex power mismatch at the updated voltages
        mismatch = 0.0;
        for k in 1..n {
            let delivered = v[k] * i_inj[k].conj();
            let demanded = s_at(k, v[k].norm())?;
            mismatch = mismatch.max((delivered - demanded).norm());
        }
        if mismatch < tol {
            return Ok(v.iter().map(|c| c.norm()).collect());
        }
    }
    Err(Error::NonConvergence {
        iters: max_iter,
        mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bundled_case() {
        let f = FeederModel::ieee33();
        assert_eq!(f.n_buses(), 33);
        assert_eq!(f.bus_ids()[0], 1);
        let total_kw: f64 = (1..=33)
            .filter_map(|b| f.load_pu(b).ok())
            .map(|(p, _)| p * 10_000.0)
            .sum();
        assert!((total_kw - 3715.0).abs() < 1e-9, "total {total_kw}");
        let (p18, q18) = f.load_pu(18).unwrap();
        assert!((p18 - 0.009).abs() < 1e-12);
        assert!((q18 - 0.004).abs() < 1e-12);
    }

    #[test]
    fn rejects_malformed_tables() {
        assert!(FeederModel::parse("1,2\n", 1.0, 12.66, 10.0).is_err());
        assert!(FeederModel::parse("1,2,0.1,bad\n", 1.0, 12.66, 10.0).is_err());
        // two parents for bus 3
        let cyclic = "1,2,0.1,0.1\n1,3,0.1,0.1\n2,3,0.1,0.1\n";
        assert!(FeederModel::parse(cyclic, 1.0, 12.66, 10.0).is_err());
        // disconnected island
        let island = "1,2,0.1,0.1\n5,6,0.1,0.1\n";
        assert!(FeederModel::parse(island, 1.0, 12.66, 10.0).is_err());
        // load on unknown bus
        let stray = "1,2,0.1,0.1\n9,10,5\n";
        assert!(FeederModel::parse(stray, 1.0, 12.66, 10.0).is_err());
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let text = "# header\n1,2,0.1,0.2\n\n2,50,20 # trailing\n";
        let f = FeederModel::parse(text, 1.0, 12.66, 10.0).unwrap();
        assert_eq!(f.n_buses(), 2);
        let (p, q) = f.load_pu(2).unwrap();
        assert!((p - 0.005).abs() < 1e-12);
        assert!((q - 0.002).abs() < 1e-12);
    }

    #[test]
    fn zero_load_gives_flat_voltage() {
        let text = "1,2,0.5,0.5\n2,3,0.5,0.5\n";
        let f = FeederModel::parse(text, 1.02, 12.66, 10.0).unwrap();
        let v = power_flow(&f, None, 1e-12, 10).unwrap();
        for &m in &v {
            assert!((m - 1.02).abs() < 1e-14);
        }
    }

    #[test]
    fn bundled_case_solves_to_textbook_minimum() {
        let f = FeederModel::ieee33();
        let v = power_flow(&f, None, 1e-10, 100).unwrap();
        let k18 = f.index_of(18).unwrap();
        let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((v[k18] - 0.913090).abs() < 1e-5, "v18 {}", v[k18]);
        assert_eq!(vmin, v[k18]);
    }

    #[test]
    fn constant_power_zip_matches_spot_load() {
        // alpha=(0,0,1) consumes the nominal power regardless of voltage, so
        // the solution must match the plain case exactly
        let f = FeederModel::ieee33();
        let plain = power_flow(&f, None, 1e-12, 200).unwrap();
        let zip = ZipLoad {
            bus: 18,
            params: ZipParams::new(0.0, 0.0),
            v0: 0.95,
        };
        let with_zip = power_flow(&f, Some(&zip), 1e-12, 200).unwrap();
        for (a, b) in plain.iter().zip(&with_zip) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn overload_reports_non_convergence() {
        let f = FeederModel::ieee33().scale_loads(40.0, None);
        match power_flow(&f, None, 1e-10, 60) {
            Err(Error::NonConvergence { .. }) => {}
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn scale_loads_respects_exception() {
        let f = FeederModel::ieee33();
        let scaled = f.scale_loads(2.0, Some(18));
        let (p18, _) = scaled.load_pu(18).unwrap();
        let (p17, _) = scaled.load_pu(17).unwrap();
        assert!((p18 - 0.009).abs() < 1e-12);
        assert!((p17 - 0.012).abs() < 1e-12);
    }
}
