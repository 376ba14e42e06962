#include "lingbayes/error.hpp"

namespace lingbayes {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::CyclicInput: return "CyclicInput";
    case ErrorCode::SidOnCyclic: return "SidOnCyclic";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::EmptyConditional: return "EmptyConditional";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::TruncatedRecord: return "TruncatedRecord";
    case ErrorCode::UnsortedEdges: return "UnsortedEdges";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace lingbayes
