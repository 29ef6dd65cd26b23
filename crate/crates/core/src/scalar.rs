use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Scalar type the geometric core is generic over.
///
/// Random draws are made in `f64` and converted in, so two runs with the same
/// seed consume identical RNG streams regardless of the scalar chosen.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + std::fmt::Debug + Send + Sync + 'static
{
    fn of_f64(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 not representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).expect("scalar not representable as f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
