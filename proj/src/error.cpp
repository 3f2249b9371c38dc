#include "mqfb/error.hpp"

namespace mqfb {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::empty_block: return "EmptyBlock";
    case ErrorCode::not_positive_definite: return "NotPositiveDefinite";
    case ErrorCode::not_converged: return "NotConverged";
    case ErrorCode::dense_cap_exceeded: return "DenseCapExceeded";
    case ErrorCode::wrong_inner_product: return "WrongInnerProduct";
    case ErrorCode::zero_degree: return "ZeroDegree";
    case ErrorCode::not_polynomial: return "NotPolynomial";
    case ErrorCode::mode_mismatch: return "ModeMismatch";
    case ErrorCode::missing_level: return "MissingLevel";
    case ErrorCode::io: return "IoError";
    case ErrorCode::parse: return "ParseError";
  }
  return "UnknownError";
}

}  // namespace mqfb
