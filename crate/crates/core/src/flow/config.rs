use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::manifold::Manifold;
use crate::nets::RebalanceSettings;

/// Parameters of a discrete flow run. Derived quantities are filled in by
/// [`FlowConfig::new`]; every one of them can be overridden in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    /// Length budget `L`.
    #[serde(rename = "L")]
    pub length_budget: f64,
    /// Convexity scale `δ`.
    pub delta: f64,
    /// Segment bound `I`.
    #[serde(rename = "I")]
    pub segment_bound: f64,
    /// Points per petal `N`.
    #[serde(rename = "N")]
    pub points_per_petal: usize,
    pub dt: f64,
    /// Petals whose points all stay within `a` of the base count as short.
    #[serde(rename = "a")]
    pub short_radius: f64,
    pub tol_stat: f64,
    pub tol_geo: f64,
    pub max_steps: usize,
    /// Core distance beyond which a flower in an end counts as escaped.
    pub escape_radius: f64,
    /// Flowers (and petals) smaller than this are contracted outright.
    pub contraction_threshold: f64,
    /// Shrink the step when the field is fast relative to the spacing.
    pub adaptive_dt: bool,
    pub rebalance: RebalanceSettings,
}

impl FlowConfig {
    /// Defaults for budget `L` and scale `δ` on `m`:
    /// `I = min(δ/2, i₁/4)`, `N = ⌊L/I⌋`, `dt = I/(10·dim)`, `a = I/4`.
    pub fn new(m: &Manifold, length_budget: f64, delta: f64) -> Result<Self> {
        let c = FlowConfig::new_unchecked(m, length_budget, delta);
        c.validate(m)?;
        Ok(c)
    }

    /// Reads `{"L": .., "delta": ..}` plus optional overrides of any field.
    pub fn from_json(m: &Manifold, v: &Value) -> Result<Self> {
        let num = |k: &str| v.get(k).and_then(Value::as_f64);
        let l = num("L").ok_or_else(|| Error::invalid("flow_config.L", "expected a number"))?;
        let delta =
            num("delta").ok_or_else(|| Error::invalid("flow_config.delta", "expected a number"))?;
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::invalid("flow_config.L", "must be positive"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid("flow_config.delta", "must be positive"));
        }
        let defaults = FlowConfig::new_unchecked(m, l, delta);
        let Value::Object(obj) = v else {
            return Err(Error::invalid("flow_config", "expected an object"));
        };
        let mut merged = serde_json::to_value(&defaults).map_err(Error::from)?;
        let known = merged
            .as_object()
            .unwrap()
            .keys()
            .cloned()
            .collect::<Vec<_>>();
        for (k, val) in obj {
            if !known.contains(k) {
                return Err(Error::invalid(format!("flow_config.{k}"), "unknown field"));
            }
            merged[k] = val.clone();
        }
        // overriding I without N keeps N consistent with the new bound
        if obj.contains_key("I") && !obj.contains_key("N") {
            let i = merged["I"].as_f64().unwrap_or(defaults.segment_bound);
            merged["N"] = Value::from((l / i).floor() as u64);
            if !obj.contains_key("dt") {
                merged["dt"] = Value::from(i / (10.0 * m.dimension() as f64));
            }
            if !obj.contains_key("a") {
                merged["a"] = Value::from(0.25 * i);
            }
            if !obj.contains_key("contraction_threshold") {
                merged["contraction_threshold"] = Value::from(0.01 * i);
            }
        }
        let c: FlowConfig = serde_json::from_value(merged)
            .map_err(|e| Error::invalid("flow_config", e.to_string()))?;
        c.validate(m)?;
        Ok(c)
    }

    fn new_unchecked(m: &Manifold, l: f64, delta: f64) -> Self {
        let i = (0.5 * delta).min(0.25 * m.injectivity_floor);
        FlowConfig {
            length_budget: l,
            delta,
            segment_bound: i,
            points_per_petal: (l / i).floor() as usize,
            dt: i / (10.0 * m.dimension() as f64),
            short_radius: 0.25 * i,
            tol_stat: 1e-6,
            tol_geo: 1e-6,
            max_steps: 100_000,
            escape_radius: l,
            contraction_threshold: 0.01 * i,
            adaptive_dt: true,
            rebalance: RebalanceSettings::default(),
        }
    }

    pub fn validate(&self, m: &Manifold) -> Result<()> {
        let pos = |x: f64, name: &str| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(
                    format!("flow_config.{name}"),
                    "must be positive",
                ))
            }
        };
        pos(self.length_budget, "L")?;
        pos(self.delta, "delta")?;
        pos(self.segment_bound, "I")?;
        pos(self.dt, "dt")?;
        pos(self.short_radius, "a")?;
        pos(self.tol_stat, "tol_stat")?;
        pos(self.tol_geo, "tol_geo")?;
        pos(self.escape_radius, "escape_radius")?;
        pos(self.contraction_threshold, "contraction_threshold")?;
        if self.points_per_petal == 0 {
            return Err(Error::invalid(
                "flow_config.N",
                "the length budget is below one segment bound",
            ));
        }
        if self.segment_bound >= 0.5 * m.injectivity_floor {
            return Err(Error::invalid(
                "flow_config.I",
                "segments would leave the uniqueness regime",
            ));
        }
        if self.short_radius >= self.segment_bound {
            return Err(Error::invalid("flow_config.a", "must be below I"));
        }
        if self.dt > self.segment_bound {
            return Err(Error::invalid("flow_config.dt", "must not exceed I"));
        }
        Ok(())
    }
}
