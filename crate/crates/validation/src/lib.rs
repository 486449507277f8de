//! Pass/fail bookkeeping for the acceptance target.

/// One criterion outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: &'static str,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(id: &'static str, name: &'static str, pass: bool, detail: String) -> Self {
        Outcome {
            id,
            name,
            pass,
            detail,
        }
    }

    pub fn line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        format!("[{tag}] {:<3} {}: {}", self.id, self.name, self.detail)
    }
}

/// Renders the report; returns it with the number of failures.
pub fn render(outcomes: &[Outcome]) -> (String, usize) {
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    let mut out: String = outcomes.iter().map(|o| o.line() + "\n").collect();
    out.push_str(&format!(
        "\nacceptance: {} passed, {failed} failed\n",
        outcomes.len() - failed
    ));
    (out, failed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_one_line_per_outcome() {
        let o = [
            Outcome::new("1", "a", true, "fine".into()),
            Outcome::new("2b", "b", false, "off by 3".into()),
        ];
        let (text, failed) = render(&o);
        assert_eq!(failed, 1);
        assert!(text.starts_with("[PASS] 1   a: fine\n[FAIL] 2b  b: off by 3\n"));
        assert!(text.ends_with("1 passed, 1 failed\n"));
    }
}
