//! Transfer functions and Bloch-Messiah decompositions.
pub struct LossChannels;
pub struct FrequencyDecomposition;
pub struct SqueezingSpectrum;
pub struct Supermode;
