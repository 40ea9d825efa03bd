//! JSON system files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::system::LinearSystem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    /// Relative bisection tolerance on reach times.
    pub time_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_eig: Option<f64>,
    pub num_pairs: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere_grid: Option<usize>,
    pub horizon_max: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            time_tol: 1e-4,
            tol_eig: None,
            num_pairs: 1000,
            seed: 42,
            sphere_grid: None,
            horizon_max: 1e3,
        }
    }
}

/// A validated system description. Actuator indices are zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B_bar")]
    pub b_bar: Vec<Vec<f64>>,
    pub half_widths: Vec<f64>,
    pub lost_actuators: Vec<usize>,
    pub x0: Vec<f64>,
    pub options: AnalysisOptions,
}

impl SystemSpec {
    pub fn a_matrix(&self) -> Matrix {
        Matrix::from_fn(self.n, self.n, |i, j| self.a[i][j])
    }

    pub fn b_bar_matrix(&self) -> Matrix {
        let k = self.half_widths.len();
        Matrix::from_fn(self.n, k, |i, j| self.b_bar[i][j])
    }

    pub fn x0_vector(&self) -> Vector {
        Vector::from_column_slice(&self.x0)
    }

    pub fn system(&self) -> Result<LinearSystem> {
        LinearSystem::new(
            self.a_matrix(),
            self.b_bar_matrix(),
            self.half_widths.clone(),
            self.lost_actuators.clone(),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    /// Parse and validate.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut c = Checker::default();
        let spec = c.spec(&v);
        match (c.issues.is_empty(), spec) {
            (true, Some(s)) => Ok(s),
            _ => Err(c.into_error()),
        }
    }
}

pub fn load_system(path: &Path) -> Result<SystemSpec> {
    let text = std::fs::read_to_string(path)?;
    SystemSpec::from_json_str(&text)
}

/// `RESILIA_SEED`, when set.
pub fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var("RESILIA_SEED") {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| Error::Schema {
            pointer: "/options/seed".into(),
            message: format!("RESILIA_SEED={s:?} is not a non-negative integer"),
        }),
        Err(_) => Ok(None),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Schema,
    Dimension,
}

#[derive(Default)]
struct Checker {
    issues: Vec<(Kind, String, String)>,
}

fn esc(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

impl Checker {
    fn schema(&mut self, ptr: &str, msg: impl Into<String>) {
        self.issues
            .push((Kind::Schema, ptr.to_string(), msg.into()));
    }

    fn dim(&mut self, ptr: &str, msg: impl Into<String>) {
        self.issues
            .push((Kind::Dimension, ptr.to_string(), msg.into()));
    }

    fn into_error(self) -> Error {
        let mut it = self.issues.into_iter();
        let (kind, pointer, mut message) =
            it.next()
                .unwrap_or((Kind::Schema, "".into(), "invalid".into()));
        let rest: Vec<String> = it.map(|(_, p, m)| format!("{p}: {m}")).collect();
        if !rest.is_empty() {
            message = format!("{message}; also {}", rest.join("; "));
        }
        match kind {
            Kind::Schema => Error::Schema { pointer, message },
            Kind::Dimension => Error::Dimension { pointer, message },
        }
    }

    fn uint(&mut self, v: &Value, ptr: &str) -> Option<u64> {
        let r = v.as_u64();
        if r.is_none() {
            self.schema(ptr, "expected a non-negative integer");
        }
        r
    }

    fn number(&mut self, v: &Value, ptr: &str) -> Option<f64> {
        let r = v.as_f64();
        if r.is_none() {
            self.schema(ptr, "expected a number");
        }
        r
    }

    fn positive(&mut self, v: &Value, ptr: &str) -> Option<f64> {
        let x = self.number(v, ptr)?;
        if x > 0.0 {
            Some(x)
        } else {
            self.schema(ptr, "must be positive");
            None
        }
    }

    fn vector(&mut self, v: &Value, ptr: &str, len: Option<usize>) -> Option<Vec<f64>> {
        let Some(arr) = v.as_array() else {
            self.schema(ptr, "expected an array of numbers");
            return None;
        };
        if let Some(len) = len {
            if arr.len() != len {
                self.dim(ptr, format!("expected length {len}, found {}", arr.len()));
                return None;
            }
        }
        let out: Vec<Option<f64>> = arr
            .iter()
            .enumerate()
            .map(|(i, x)| self.number(x, &format!("{ptr}/{i}")))
            .collect();
        out.into_iter().collect()
    }

    fn matrix(
        &mut self,
        v: &Value,
        ptr: &str,
        rows: usize,
        cols: Option<usize>,
    ) -> Option<Vec<Vec<f64>>> {
        let Some(arr) = v.as_array() else {
            self.schema(ptr, "expected an array of rows");
            return None;
        };
        if arr.len() != rows {
            self.dim(ptr, format!("expected {rows} rows, found {}", arr.len()));
            return None;
        }
        let width = cols.or_else(|| arr.first().and_then(|r| r.as_array()).map(|r| r.len()));
        let out: Vec<Option<Vec<f64>>> = arr
            .iter()
            .enumerate()
            .map(|(i, r)| self.vector(r, &format!("{ptr}/{i}"), width))
            .collect();
        let out: Option<Vec<Vec<f64>>> = out.into_iter().collect();
        match out {
            Some(m) if m.first().is_some_and(|r| r.is_empty()) => {
                self.dim(ptr, "rows must not be empty");
                None
            }
            m => m,
        }
    }

    fn spec(&mut self, v: &Value) -> Option<SystemSpec> {
        let Some(obj) = v.as_object() else {
            self.schema("", "expected a JSON object");
            return None;
        };
        const KEYS: [&str; 7] = [
            "n",
            "A",
            "B_bar",
            "half_widths",
            "lost_actuators",
            "x0",
            "options",
        ];
        for k in obj.keys().filter(|k| !KEYS.contains(&k.as_str())) {
            self.schema(&format!("/{}", esc(k)), "unknown field");
        }
        let field = |k: &str| obj.get(k);
        let required = |c: &mut Self, k: &str| {
            let f = field(k);
            if f.is_none() {
                c.schema(&format!("/{k}"), "missing required field");
            }
            f
        };

        let n = required(self, "n")
            .and_then(|x| self.uint(x, "/n"))
            .map(|x| x as usize);
        let n = match n {
            Some(0) => {
                self.schema("/n", "must be at least 1");
                None
            }
            n => n,
        };
        let a_v = required(self, "A");
        let b_v = required(self, "B_bar");
        let lost_v = required(self, "lost_actuators");
        let x0_v = required(self, "x0");
        let n = n?;

        let a = a_v.and_then(|v| self.matrix(v, "/A", n, Some(n)));
        let b_bar = b_v.and_then(|v| self.matrix(v, "/B_bar", n, None));
        let k = b_bar.as_ref().map(|b| b[0].len());
        let x0 = x0_v.and_then(|v| self.vector(v, "/x0", Some(n)));

        let half_widths = match (field("half_widths"), k) {
            (None, Some(k)) => Some(vec![1.0; k]),
            (Some(v), Some(k)) => self.vector(v, "/half_widths", Some(k)).and_then(|w| {
                let bad: Vec<usize> = (0..k).filter(|&i| w[i].is_nan() || w[i] < 0.0).collect();
                for i in &bad {
                    self.schema(&format!("/half_widths/{i}"), "must be non-negative");
                }
                bad.is_empty().then_some(w)
            }),
            _ => None,
        };

        let lost = lost_v.and_then(|v| self.lost(v, k));
        let options = match field("options") {
            None => Some(AnalysisOptions::default()),
            Some(v) => self.options(v),
        };

        Some(SystemSpec {
            n,
            a: a?,
            b_bar: b_bar?,
            half_widths: half_widths?,
            lost_actuators: lost?,
            x0: x0?,
            options: options?,
        })
    }

    fn lost(&mut self, v: &Value, k: Option<usize>) -> Option<Vec<usize>> {
        let Some(arr) = v.as_array() else {
            self.schema("/lost_actuators", "expected an array of column indices");
            return None;
        };
        let mut out = Vec::new();
        let mut ok = true;
        for (i, x) in arr.iter().enumerate() {
            let ptr = format!("/lost_actuators/{i}");
            match self.uint(x, &ptr) {
                Some(j) => {
                    let j = j as usize;
                    if let Some(k) = k {
                        if j >= k {
                            self.schema(
                                &ptr,
                                format!("index {j} out of range for {k} actuator columns"),
                            );
                            ok = false;
                        }
                    }
                    if out.contains(&j) {
                        self.schema(&ptr, format!("duplicate index {j}"));
                        ok = false;
                    }
                    out.push(j);
                }
                None => ok = false,
            }
        }
        if let Some(k) = k {
            if ok && out.len() >= k {
                self.schema("/lost_actuators", "at least one actuator must be retained");
                ok = false;
            }
        }
        ok.then_some(out)
    }

    fn options(&mut self, v: &Value) -> Option<AnalysisOptions> {
        let Some(obj): Option<&Map<String, Value>> = v.as_object() else {
            self.schema("/options", "expected an object");
            return None;
        };
        const KEYS: [&str; 6] = [
            "time_tol",
            "tol_eig",
            "num_pairs",
            "seed",
            "sphere_grid",
            "horizon_max",
        ];
        for k in obj.keys().filter(|k| !KEYS.contains(&k.as_str())) {
            self.schema(&format!("/options/{}", esc(k)), "unknown option");
        }
        let before = self.issues.len();
        let mut o = AnalysisOptions::default();
        if let Some(x) = obj
            .get("time_tol")
            .and_then(|x| self.positive(x, "/options/time_tol"))
        {
            o.time_tol = x;
        }
        if let Some(x) = obj.get("tol_eig") {
            o.tol_eig = self.positive(x, "/options/tol_eig");
        }
        if let Some(x) = obj
            .get("num_pairs")
            .and_then(|x| self.uint(x, "/options/num_pairs"))
        {
            o.num_pairs = x as usize;
        }
        if let Some(x) = obj.get("seed").and_then(|x| self.uint(x, "/options/seed")) {
            o.seed = x;
        }
        if let Some(x) = obj.get("sphere_grid") {
            o.sphere_grid = match self.uint(x, "/options/sphere_grid") {
                Some(0) => {
                    self.schema("/options/sphere_grid", "must be at least 1");
                    None
                }
                g => g.map(|g| g as usize),
            };
        }
        if let Some(x) = obj
            .get("horizon_max")
            .and_then(|x| self.positive(x, "/options/horizon_max"))
        {
            o.horizon_max = x;
        }
        (self.issues.len() == before).then_some(o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        r#"{"n": 1, "A": [[-1]], "B_bar": [[1, 0.5]], "lost_actuators": [1], "x0": [1]}"#;

    #[test]
    fn minimal_file_with_defaults() {
        let s = SystemSpec::from_json_str(MINIMAL).unwrap();
        assert_eq!(s.half_widths, vec![1.0, 1.0]);
        assert_eq!(s.options, AnalysisOptions::default());
        assert!(s.system().is_ok());
    }

    #[test]
    fn round_trip() {
        let s = SystemSpec::from_json_str(MINIMAL).unwrap();
        assert_eq!(SystemSpec::from_json_str(&s.to_json()).unwrap(), s);
    }

    fn err(text: &str) -> Error {
        SystemSpec::from_json_str(text).unwrap_err()
    }

    #[test]
    fn out_of_range_index_names_the_index() {
        let e =
            err(r#"{"n": 1, "A": [[-1]], "B_bar": [[1, 0.5]], "lost_actuators": [7], "x0": [1]}"#);
        match e {
            Error::Schema { pointer, message } => {
                assert_eq!(pointer, "/lost_actuators/0");
                assert!(message.contains('7'));
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn shape_errors_are_dimension_errors() {
        let e = err(
            r#"{"n": 2, "A": [[-1, 0]], "B_bar": [[1], [1]], "lost_actuators": [], "x0": [1, 1]}"#,
        );
        assert!(
            matches!(e, Error::Dimension { ref pointer, .. } if pointer == "/A"),
            "{e:?}"
        );
        let e = err(
            r#"{"n": 2, "A": [[-1, 0], [0, -1, 3]], "B_bar": [[1], [1]], "lost_actuators": [], "x0": [1, 1]}"#,
        );
        assert!(
            matches!(e, Error::Dimension { ref pointer, .. } if pointer == "/A/1"),
            "{e:?}"
        );
        let e = err(r#"{"n": 1, "A": [[-1]], "B_bar": [[1]], "lost_actuators": [], "x0": [1, 2]}"#);
        assert!(
            matches!(e, Error::Dimension { ref pointer, .. } if pointer == "/x0"),
            "{e:?}"
        );
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(err("{"), Error::Parse(_)));
        assert!(matches!(err("[]"), Error::Schema { .. }));
        let e = err(r#"{"n": 1, "A": [[-1]], "B_bar": [[1]], "lost_actuators": [0], "x0": [1]}"#);
        assert!(matches!(e, Error::Schema { ref pointer, .. } if pointer == "/lost_actuators"));
        let e = err(
            r#"{"n": 1, "A": [["x"]], "B_bar": [[1, 1]], "lost_actuators": [0, 0], "x0": [1]}"#,
        );
        match e {
            Error::Schema { pointer, message } => {
                assert_eq!(pointer, "/A/0/0");
                assert!(message.contains("/lost_actuators/1"));
            }
            e => panic!("{e:?}"),
        }
        let e = err(
            r#"{"n": 1, "A": [[-1]], "B_bar": [[1]], "lost_actuators": [], "x0": [1], "options": {"seed": -1}}"#,
        );
        assert!(matches!(e, Error::Schema { ref pointer, .. } if pointer == "/options/seed"));
        let e = err(r#"{"A": [[-1]], "B_bar": [[1]], "lost_actuators": [], "x0": [1]}"#);
        assert!(matches!(e, Error::Schema { ref pointer, .. } if pointer == "/n"));
    }
}
