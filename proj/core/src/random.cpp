#include "mlkm/random.hpp"

#include "mlkm/error.hpp"

namespace mlkm {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidWidth: return "InvalidWidth";
    case Errc::InvalidDim: return "InvalidDim";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::DegenerateFit: return "DegenerateFit";
    case Errc::InvalidRate: return "InvalidRate";
    case Errc::IncompatibleScenario: return "IncompatibleScenario";
    case Errc::ParseError: return "ParseError";
    case Errc::DivergenceDetected: return "DivergenceDetected";
    case Errc::TimingUnstable: return "TimingUnstable";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
  }
  return "Unknown";
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace mlkm
