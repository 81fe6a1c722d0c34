//! Text form of rule specs.
//!
//! ```text
//! rule ::= lf | full | prop | nafr
//!        | ab:A=<fn>,B=<fn> | afam:A=<fn> | bfam:B=<fn>
//!        | lin:<r>,<r> | lindual:<r>,<r>
//!        | convex(<rule>;<rule>;<r>) | dual(<rule>)
//! fn   ::= const:<r> | id | scale:<r> | affine:<r>,<r> | poly:<r>[,<r>...]
//! ```
//!
//! `affine:a,b` is `t -> a t + b`; `poly` coefficients are in ascending powers.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rules::RuleSpec;
use crate::scalar::ScalarFn;

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn error(&self, expected: &str) -> Error {
        let token: String = self
            .rest()
            .chars()
            .take_while(|c| !matches!(c, ',' | ';' | ')' | '('))
            .collect();
        let token = if token.is_empty() {
            self.rest().chars().next().map(String::from).unwrap_or_else(|| "end of input".into())
        } else {
            token
        };
        Error::Parse {
            position: self.pos,
            token,
            expected: expected.to_owned(),
        }
    }

    fn eat(&mut self, lit: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(lit) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> Result<()> {
        if self.eat(lit) {
            Ok(())
        } else {
            Err(self.error(&format!("`{lit}`")))
        }
    }

    fn word(&mut self) -> &'a str {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !c.is_ascii_alphanumeric())
            .unwrap_or(self.rest().len());
        let w = &self.rest()[..len];
        self.pos += len;
        w
    }

    fn peek_number(&self) -> bool {
        self.rest()
            .trim_start()
            .starts_with(|c: char| c.is_ascii_digit() || matches!(c, '-' | '+' | '.'))
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '-' | '+' | '.' | 'e' | 'E')))
            .unwrap_or(self.rest().len());
        let text = &self.rest()[..len];
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos += len;
                Ok(v)
            }
            _ => Err(self.error("a finite number")),
        }
    }

    fn scalar_fn(&mut self) -> Result<ScalarFn> {
        let start = self.pos;
        let f = match self.word() {
            "const" => {
                self.expect(":")?;
                ScalarFn::Constant(self.number()?)
            }
            "id" => ScalarFn::Identity,
            "scale" => {
                self.expect(":")?;
                ScalarFn::Scale(self.number()?)
            }
            "affine" => {
                self.expect(":")?;
                let slope = self.number()?;
                self.expect(",")?;
                let intercept = self.number()?;
                ScalarFn::Affine { slope, intercept }
            }
            "poly" => {
                self.expect(":")?;
                let mut coeffs = vec![self.number()?];
                loop {
                    let save = self.pos;
                    if self.eat(",") && self.peek_number() {
                        coeffs.push(self.number()?);
                    } else {
                        self.pos = save;
                        break;
                    }
                }
                ScalarFn::Polynomial(coeffs)
            }
            _ => {
                self.pos = start;
                self.skip_ws();
                return Err(self.error("a function (const, id, scale, affine, poly)"));
            }
        };
        Ok(f)
    }

    fn rule(&mut self) -> Result<RuleSpec> {
        let start = self.pos;
        let rule = match self.word() {
            "lf" => RuleSpec::LaissezFaire,
            "full" => RuleSpec::Full,
            "prop" => RuleSpec::Proportional,
            "nafr" => RuleSpec::NeedAdjustedFull,
            "ab" => {
                self.expect(":")?;
                self.expect("A=")?;
                let a = self.scalar_fn()?;
                self.expect(",")?;
                self.expect("B=")?;
                let b = self.scalar_fn()?;
                RuleSpec::Ab { a, b }
            }
            "afam" => {
                self.expect(":")?;
                self.expect("A=")?;
                RuleSpec::AFamily(self.scalar_fn()?)
            }
            "bfam" => {
                self.expect(":")?;
                self.expect("B=")?;
                RuleSpec::BFamily(self.scalar_fn()?)
            }
            kw @ ("lin" | "lindual") => {
                self.expect(":")?;
                let alpha1 = self.number()?;
                self.expect(",")?;
                let alpha2 = self.number()?;
                if kw == "lin" {
                    RuleSpec::Linear { alpha1, alpha2 }
                } else {
                    RuleSpec::LinearDual { alpha1, alpha2 }
                }
            }
            "convex" => {
                self.expect("(")?;
                let first = self.rule()?;
                self.expect(";")?;
                let second = self.rule()?;
                self.expect(";")?;
                let at = self.pos;
                let weight = self.number()?;
                self.expect(")")?;
                RuleSpec::convex(first, second, weight).map_err(|_| Error::Parse {
                    position: at,
                    token: weight.to_string(),
                    expected: "a weight in [0, 1]".into(),
                })?
            }
            "dual" => {
                self.expect("(")?;
                let inner = self.rule()?;
                self.expect(")")?;
                RuleSpec::dual(inner)
            }
            _ => {
                self.pos = start;
                self.skip_ws();
                return Err(self.error("a rule (lf, full, prop, nafr, ab, afam, bfam, lin, lindual, convex, dual)"));
            }
        };
        Ok(rule)
    }

    fn finish(&mut self) -> Result<()> {
        self.skip_ws();
        if self.rest().is_empty() {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }
}

pub fn parse_rule(src: &str) -> Result<RuleSpec> {
    let mut p = Parser::new(src);
    let rule = p.rule()?;
    p.finish()?;
    Ok(rule)
}

/// Comma-separated rules, e.g. `lf,lin:0.3,0.2,prop`.
pub fn parse_rule_list(src: &str) -> Result<Vec<RuleSpec>> {
    let mut p = Parser::new(src);
    let mut rules = vec![p.rule()?];
    while p.eat(",") {
        rules.push(p.rule()?);
    }
    p.finish()?;
    Ok(rules)
}

pub fn parse_scalar_fn(src: &str) -> Result<ScalarFn> {
    let mut p = Parser::new(src);
    let f = p.scalar_fn()?;
    p.finish()?;
    Ok(f)
}

impl FromStr for RuleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_rule(s)
    }
}

impl FromStr for ScalarFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_scalar_fn(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_every_form() {
        assert_eq!(parse_rule("lf").unwrap(), RuleSpec::LaissezFaire);
        assert_eq!(parse_rule(" nafr ").unwrap(), RuleSpec::NeedAdjustedFull);
        assert_eq!(
            parse_rule("ab:A=const:0.5,B=scale:0.5").unwrap(),
            RuleSpec::ab(ScalarFn::Constant(0.5), ScalarFn::Scale(0.5))
        );
        assert_eq!(
            parse_rule("ab:A=poly:1,2,B=affine:-1,1").unwrap(),
            RuleSpec::ab(
                ScalarFn::Polynomial(vec![1.0, 2.0]),
                ScalarFn::Affine {
                    slope: -1.0,
                    intercept: 1.0
                }
            )
        );
        assert_eq!(
            parse_rule("bfam:B=poly:0,0,1").unwrap(),
            RuleSpec::BFamily(ScalarFn::Polynomial(vec![0.0, 0.0, 1.0]))
        );
        assert_eq!(parse_rule("afam:A=id").unwrap(), RuleSpec::AFamily(ScalarFn::Identity));
        assert_eq!(parse_rule("lin:-0.5,1").unwrap(), RuleSpec::linear(-0.5, 1.0));
        assert_eq!(parse_rule("lindual:0.3,2e-1").unwrap(), RuleSpec::linear_dual(0.3, 0.2));
        assert_eq!(
            parse_rule("convex(lf;dual(full);0.5)").unwrap(),
            RuleSpec::convex(RuleSpec::LaissezFaire, RuleSpec::dual(RuleSpec::Full), 0.5).unwrap()
        );
    }

    #[test]
    fn rule_lists_split_on_rule_boundaries() {
        let rules = parse_rule_list("lf,lin:0.3,0.2,ab:A=id,B=poly:1,2,prop").unwrap();
        assert_eq!(
            rules,
            vec![
                RuleSpec::LaissezFaire,
                RuleSpec::linear(0.3, 0.2),
                RuleSpec::ab(ScalarFn::Identity, ScalarFn::Polynomial(vec![1.0, 2.0])),
                RuleSpec::Proportional,
            ]
        );
    }

    #[test]
    fn errors_name_the_offending_token() {
        let Err(Error::Parse { token, position, .. }) = parse_rule("convex(lf;bogus;0.5)") else {
            panic!("expected parse error");
        };
        assert_eq!((token.as_str(), position), ("bogus", 10));
        let Err(Error::Parse { token, .. }) = parse_rule("convex(lf;prop;1.5)") else {
            panic!("expected parse error");
        };
        assert_eq!(token, "1.5");
        let Err(Error::Parse { token, .. }) = parse_rule("lin:0.3") else {
            panic!("expected parse error");
        };
        assert_eq!(token, "end of input");
        assert!(parse_rule("ab:A=sqrt,B=id").is_err());
        assert!(parse_rule("lin:nan,1").is_err());
        assert!(parse_rule("prop extra").is_err());
        assert!(parse_rule("").is_err());
    }

    fn arb_fn() -> impl Strategy<Value = ScalarFn> {
        let num = -100.0f64..100.0;
        prop_oneof![
            num.clone().prop_map(ScalarFn::Constant),
            Just(ScalarFn::Identity),
            num.clone().prop_map(ScalarFn::Scale),
            (num.clone(), num.clone()).prop_map(|(slope, intercept)| ScalarFn::Affine { slope, intercept }),
            prop::collection::vec(num, 1..5).prop_map(ScalarFn::Polynomial),
        ]
    }

    fn arb_rule() -> impl Strategy<Value = RuleSpec> {
        let leaf = prop_oneof![
            Just(RuleSpec::LaissezFaire),
            Just(RuleSpec::Full),
            Just(RuleSpec::Proportional),
            Just(RuleSpec::NeedAdjustedFull),
            (arb_fn(), arb_fn()).prop_map(|(a, b)| RuleSpec::Ab { a, b }),
            arb_fn().prop_map(RuleSpec::AFamily),
            arb_fn().prop_map(RuleSpec::BFamily),
            (-5.0f64..5.0, -5.0f64..5.0).prop_map(|(a, b)| RuleSpec::linear(a, b)),
            (-5.0f64..5.0, -5.0f64..5.0).prop_map(|(a, b)| RuleSpec::linear_dual(a, b)),
        ];
        leaf.prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone(), 0.0f64..=1.0)
                    .prop_map(|(a, b, w)| RuleSpec::convex(a, b, w).unwrap()),
                inner.prop_map(RuleSpec::dual),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_round_trips(rule in arb_rule()) {
            let text = rule.to_string();
            prop_assert_eq!(parse_rule(&text).unwrap(), rule);
        }
    }
}
