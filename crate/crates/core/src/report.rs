//! JSON conventions shared by every report: exact rationals as
//! `{"num", "den"}` string pairs, floats as `{"value", "abs_error"}`.

use num_rational::BigRational;
use serde::ser::SerializeMap;
use serde::Serializer;

use crate::scalar::Scalar;

pub const FORMAT_VERSION: &str = "dslab-report/1";

pub fn ser_rational<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(2))?;
    map.serialize_entry("num", &r.numer().to_string())?;
    map.serialize_entry("den", &r.denom().to_string())?;
    map.end()
}

pub fn ser_opt_rational<S: Serializer>(r: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => ser_rational(r, s),
        None => s.serialize_none(),
    }
}

pub fn ser_scalar<T: Scalar, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_some(&v.to_json())
}

pub fn ser_rationals<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    let json: Vec<_> = v.iter().map(crate::scalar::rational_json).collect();
    s.serialize_some(&json)
}

/// Config-side rationals: written as `"a/b"` or `"a"`, read from a string or
/// an integer.
pub mod rational_text {
    use std::fmt;

    use num_rational::BigRational;
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    use crate::scalar::parse_rational;

    pub fn to_text(r: &BigRational) -> String {
        if r.is_integer() {
            r.numer().to_string()
        } else {
            format!("{}/{}", r.numer(), r.denom())
        }
    }

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_text(r))
    }

    struct RationalVisitor;

    impl<'de> Visitor<'de> for RationalVisitor {
        type Value = BigRational;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("a rational as \"a/b\", \"a\" or an integer")
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<BigRational, E> {
            parse_rational(v).ok_or_else(|| E::custom(format!("invalid rational {v:?}")))
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<BigRational, E> {
            Ok(BigRational::from_integer(v.into()))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<BigRational, E> {
            Ok(BigRational::from_integer(v.into()))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        d.deserialize_any(RationalVisitor)
    }
}
