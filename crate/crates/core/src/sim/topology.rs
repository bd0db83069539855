use std::path::Path;

use ini::Ini;
use serde::Serialize;

use super::SimError;

/// Signal speed in fiber, km/s.
pub const DEFAULT_C_FIBER: f64 = 200_000.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkSpec {
    pub name: Option<String>,
    pub length_km: f64,
    /// Informational only; the baselines already account for fiber loss.
    pub attenuation_db_per_km: Option<f64>,
    pub baseline_f_el: f64,
    pub baseline_p_suc: f64,
    /// Duration of one generation attempt, seconds.
    pub t_cycle: f64,
}

impl LinkSpec {
    /// Link whose cycle time is the one-way light travel time over the fiber.
    pub fn new(length_km: f64, baseline_f_el: f64, baseline_p_suc: f64) -> Self {
        Self {
            name: None,
            length_km,
            attenuation_db_per_km: None,
            baseline_f_el,
            baseline_p_suc,
            t_cycle: length_km / DEFAULT_C_FIBER,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |what: &str| Err(SimError::Topology(format!("link {}: {what}", self.label())));
        if !(self.length_km >= 0.0) || !self.length_km.is_finite() {
            return bad("length_km must be finite and >= 0");
        }
        if !(0.0..=1.0).contains(&self.baseline_f_el) {
            return bad("baseline_f_el must lie in [0, 1]");
        }
        if !(self.baseline_p_suc > 0.0 && self.baseline_p_suc <= 1.0) {
            return bad("baseline_p_suc must lie in (0, 1]");
        }
        if !(self.t_cycle > 0.0) || !self.t_cycle.is_finite() {
            return bad("t_cycle must be finite and > 0");
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| format!("{} km", self.length_km))
    }
}

/// Ordered chain of nodes joined by fiber links.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainTopology {
    node_names: Vec<String>,
    links: Vec<LinkSpec>,
    t_swap: f64,
}

impl ChainTopology {
    pub fn new(node_names: Vec<String>, links: Vec<LinkSpec>, t_swap: f64) -> Result<Self, SimError> {
        if node_names.len() < 2 {
            return Err(SimError::Topology("a chain needs at least two nodes".into()));
        }
        if links.len() + 1 != node_names.len() {
            return Err(SimError::Topology(format!(
                "{} nodes need {} links, got {}",
                node_names.len(),
                node_names.len() - 1,
                links.len()
            )));
        }
        if !(t_swap >= 0.0) || !t_swap.is_finite() {
            return Err(SimError::Topology(format!("t_swap = {t_swap} must be finite and >= 0")));
        }
        for link in &links {
            link.validate()?;
        }
        Ok(Self {
            node_names,
            links,
            t_swap,
        })
    }

    /// `n_nodes` equally spaced nodes with identical links.
    pub fn uniform(n_nodes: usize, length_km: f64, baseline_f_el: f64, baseline_p_suc: f64) -> Result<Self, SimError> {
        if n_nodes < 2 {
            return Err(SimError::Topology("a chain needs at least two nodes".into()));
        }
        let names = (0..n_nodes).map(|i| format!("n{i}")).collect();
        let links = vec![LinkSpec::new(length_km, baseline_f_el, baseline_p_suc); n_nodes - 1];
        Self::new(names, links, 0.0)
    }

    pub fn with_t_swap(mut self, t_swap: f64) -> Result<Self, SimError> {
        self.t_swap = t_swap;
        Self::new(self.node_names, self.links, self.t_swap)
    }

    /// Overrides the cycle time of every link.
    pub fn with_t_cycle(mut self, t_cycle: f64) -> Result<Self, SimError> {
        for link in &mut self.links {
            link.t_cycle = t_cycle;
        }
        Self::new(self.node_names, self.links, self.t_swap)
    }

    pub fn node_names(&self) -> &[String] {
        &self.node_names
    }

    pub fn links(&self) -> &[LinkSpec] {
        &self.links
    }

    pub fn n_nodes(&self) -> usize {
        self.node_names.len()
    }

    pub fn n_repeaters(&self) -> usize {
        self.node_names.len() - 2
    }

    pub fn t_swap(&self) -> f64 {
        self.t_swap
    }

    pub fn total_length_km(&self) -> f64 {
        self.links.iter().map(|l| l.length_km).sum()
    }

    pub fn is_uniform(&self) -> bool {
        self.links.windows(2).all(|w| {
            w[0].length_km == w[1].length_km
                && w[0].baseline_f_el == w[1].baseline_f_el
                && w[0].baseline_p_suc == w[1].baseline_p_suc
                && w[0].t_cycle == w[1].t_cycle
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Topology(format!("{}: {e}", path.display())))?;
        Self::from_ini_str(&text)
    }

    /// Parses the topology file format.
    ///
    /// ```text
    /// [chain]
    /// nodes = Delft, The Hague, Leiden, Amsterdam
    /// t_swap = 0
    /// c_fiber = 200000
    ///
    /// [link.0]
    /// name = DH
    /// length_km = 12
    /// attenuation_db_per_km = 0.25
    /// baseline_f_el = 0.9683
    /// baseline_p_suc = 0.002588
    /// # t_cycle = 6e-5   (optional, seconds)
    /// ```
    ///
    /// A `[uniform]` section (`nodes`, `length_km`, `baseline_f_el`,
    /// `baseline_p_suc`, optional `t_cycle`) may replace the per-link
    /// sections for equally spaced chains.
    pub fn from_ini_str(text: &str) -> Result<Self, SimError> {
        let ini = Ini::load_from_str(text).map_err(|e| SimError::Topology(e.to_string()))?;
        let get = |section: Option<&str>, key: &str| -> Option<String> {
            ini.section(section)
                .and_then(|s| s.get(key))
                .map(|v| v.trim().to_string())
        };
        let num = |section: &str, key: &str| -> Result<Option<f64>, SimError> {
            get(Some(section), key)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| SimError::Topology(format!("[{section}] {key}: `{v}` is not a number")))
                })
                .transpose()
        };
        let require = |section: &str, key: &str| -> Result<f64, SimError> {
            num(section, key)?.ok_or_else(|| SimError::Topology(format!("[{section}] is missing `{key}`")))
        };

        let t_swap = num("chain", "t_swap")?.unwrap_or(0.0);
        let c_fiber = num("chain", "c_fiber")?.unwrap_or(DEFAULT_C_FIBER);
        if !(c_fiber > 0.0) {
            return Err(SimError::Topology("c_fiber must be > 0".into()));
        }

        if ini.section(Some("uniform")).is_some() {
            let n = require("uniform", "nodes")?;
            if n.fract() != 0.0 || n < 2.0 {
                return Err(SimError::Topology(format!("[uniform] nodes = {n} is not a count >= 2")));
            }
            let length_km = require("uniform", "length_km")?;
            let mut link = LinkSpec::new(
                length_km,
                require("uniform", "baseline_f_el")?,
                require("uniform", "baseline_p_suc")?,
            );
            link.attenuation_db_per_km = num("uniform", "attenuation_db_per_km")?;
            link.t_cycle = num("uniform", "t_cycle")?.unwrap_or(length_km / c_fiber);
            let n = n as usize;
            let names = match get(Some("chain"), "nodes") {
                Some(list) => split_names(&list),
                None => (0..n).map(|i| format!("n{i}")).collect(),
            };
            return Self::new(names, vec![link; n - 1], t_swap);
        }

        let names = get(Some("chain"), "nodes")
            .map(|list| split_names(&list))
            .ok_or_else(|| SimError::Topology("[chain] is missing `nodes`".into()))?;
        let mut links = Vec::new();
        for i in 0.. {
            let section = format!("link.{i}");
            if ini.section(Some(section.as_str())).is_none() {
                break;
            }
            let length_km = require(&section, "length_km")?;
            links.push(LinkSpec {
                name: get(Some(section.as_str()), "name"),
                length_km,
                attenuation_db_per_km: num(&section, "attenuation_db_per_km")?,
                baseline_f_el: require(&section, "baseline_f_el")?,
                baseline_p_suc: require(&section, "baseline_p_suc")?,
                t_cycle: num(&section, "t_cycle")?.unwrap_or(length_km / c_fiber),
            });
        }
        Self::new(names, links, t_swap)
    }
}

fn split_names(list: &str) -> Vec<String> {
    list.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_chain_shape() {
        let t = ChainTopology::uniform(5, 100.0, 0.9, 1.5e-5).unwrap();
        assert_eq!(t.n_nodes(), 5);
        assert_eq!(t.n_repeaters(), 3);
        assert_eq!(t.links().len(), 4);
        assert!(t.is_uniform());
        assert_eq!(t.links()[0].t_cycle, 100.0 / DEFAULT_C_FIBER);
        assert_eq!(t.total_length_km(), 400.0);
    }

    #[test]
    fn rejects_inconsistent_link_count() {
        let link = LinkSpec::new(10.0, 0.9, 0.1);
        assert!(ChainTopology::new(vec!["a".into(), "b".into(), "c".into()], vec![link], 0.0).is_err());
    }

    #[test]
    fn zero_length_needs_explicit_cycle() {
        assert!(ChainTopology::uniform(3, 0.0, 0.9, 0.1).is_err());
        let t = ChainTopology::uniform(3, 1.0, 0.9, 0.1)
            .unwrap()
            .with_t_cycle(1.0)
            .unwrap();
        assert_eq!(t.links()[1].t_cycle, 1.0);
    }

    #[test]
    fn parses_per_link_sections() {
        let text = "[chain]\nnodes = A, B, C\nt_swap = 0.5\nc_fiber = 100000\n\
                    [link.0]\nname = AB\nlength_km = 10\nbaseline_f_el = 0.96\nbaseline_p_suc = 0.002\n\
                    [link.1]\nlength_km = 20\nbaseline_f_el = 0.95\nbaseline_p_suc = 0.001\nt_cycle = 0.3\n";
        let t = ChainTopology::from_ini_str(text).unwrap();
        assert_eq!(t.n_nodes(), 3);
        assert_eq!(t.t_swap(), 0.5);
        assert_eq!(t.links()[0].name.as_deref(), Some("AB"));
        assert_eq!(t.links()[0].t_cycle, 1e-4);
        assert_eq!(t.links()[1].t_cycle, 0.3);
        assert!(!t.is_uniform());
    }

    #[test]
    fn parses_uniform_section() {
        let text = "[chain]\nt_swap = 1\n[uniform]\nnodes = 3\nlength_km = 20\n\
                    baseline_f_el = 0.5\nbaseline_p_suc = 1e-10\nt_cycle = 1\n";
        let t = ChainTopology::from_ini_str(text).unwrap();
        assert_eq!(t.n_nodes(), 3);
        assert_eq!(t.links()[1].t_cycle, 1.0);
        assert_eq!(t.t_swap(), 1.0);
    }

    #[test]
    fn reports_missing_keys() {
        let err = ChainTopology::from_ini_str("[chain]\nnodes = A, B\n[link.0]\nlength_km = 3\n").unwrap_err();
        assert!(err.to_string().contains("baseline_f_el"), "{err}");
    }
}
