//! Result records and their JSON / CSV output.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// One measured quantity with the parameters that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub experiment: String,
    /// Parameter echo in a fixed order; a JSON object on disk.
    #[serde(with = "ordered_map")]
    pub params: Vec<(String, String)>,
    pub quantity: String,
    pub estimate: Option<f64>,
    pub stderr: Option<f64>,
    pub exact: Option<f64>,
    pub trials: Option<u64>,
    /// The bound the quantity is checked against, if any.
    pub bound: Option<f64>,
    pub holds: Option<bool>,
}

impl ResultRecord {
    pub fn new(experiment: &str, params: &[(&str, String)], quantity: &str) -> Self {
        ResultRecord {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            quantity: quantity.into(),
            estimate: None,
            stderr: None,
            exact: None,
            trials: None,
            bound: None,
            holds: None,
        }
    }
}

mod ordered_map {
    use serde::de::{MapAccess, Visitor};
    use serde::ser::SerializeMap;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(pairs: &[(String, String)], s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(pairs.len()))?;
        for (k, v) in pairs {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }

    struct Pairs;

    impl<'de> Visitor<'de> for Pairs {
        type Value = Vec<(String, String)>;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a map of parameter strings")
        }

        fn visit_map<A: MapAccess<'de>>(self, mut a: A) -> Result<Self::Value, A::Error> {
            let mut out = Vec::new();
            while let Some(kv) = a.next_entry()? {
                out.push(kv);
            }
            Ok(out)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(String, String)>, D::Error> {
        d.deserialize_map(Pairs)
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    schema_version: u32,
    experiment: &'a str,
    params: String,
    quantity: &'a str,
    estimate: Option<f64>,
    stderr: Option<f64>,
    exact: Option<f64>,
    trials: Option<u64>,
    bound: Option<f64>,
    holds: Option<bool>,
}

pub fn write_records<W: Write>(mut w: W, records: &[ResultRecord], format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut w, records)?;
            writeln!(w)?;
        }
        OutputFormat::Csv => {
            let mut out = csv::Writer::from_writer(w);
            for r in records {
                let params = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";");
                out.serialize(CsvRow {
                    schema_version: r.schema_version,
                    experiment: &r.experiment,
                    params,
                    quantity: &r.quantity,
                    estimate: r.estimate,
                    stderr: r.stderr,
                    exact: r.exact,
                    trials: r.trials,
                    bound: r.bound,
                    holds: r.holds,
                })?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_carry_parameters() {
        let mut r = ResultRecord::new("qas-security", &[("q", "5".into()), ("d", "1".into())], "p_fool");
        r.exact = Some(0.25);
        r.holds = Some(true);
        let mut csv = Vec::new();
        write_records(&mut csv, &[r.clone()], OutputFormat::Csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "schema_version,experiment,params,quantity,estimate,stderr,exact,trials,bound,holds");
        assert_eq!(lines.next().unwrap(), "1,qas-security,q=5;d=1,p_fool,,,0.25,,,true");
        let mut json = Vec::new();
        write_records(&mut json, &[r.clone()], OutputFormat::Json).unwrap();
        assert!(String::from_utf8_lossy(&json).contains(r#""params": {
      "q": "5",
      "d": "1"
    }"#));
        let back: Vec<ResultRecord> = serde_json::from_slice(&json).unwrap();
        assert_eq!(back, vec![r]);
    }
}
