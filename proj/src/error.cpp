#include "aqlock/error.hpp"

namespace aqlock {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::OrdinalOutOfRange: return "ordinal-out-of-range";
        case ErrorKind::AmbiguousInput: return "ambiguous-input";
        case ErrorKind::EmptyDataset: return "empty-dataset";
        case ErrorKind::DegenerateColumn: return "degenerate-column";
        case ErrorKind::Schema: return "schema";
        case ErrorKind::EmptyInput: return "empty-input";
        case ErrorKind::NoValidPixels: return "no-valid-pixels";
        case ErrorKind::UndefinedCorrelation: return "undefined-correlation";
        case ErrorKind::Shape: return "shape";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::InsufficientData: return "insufficient-data";
        case ErrorKind::Config: return "config";
        case ErrorKind::Io: return "io";
        case ErrorKind::Parse: return "parse";
    }
    return "unknown";
}

}  // namespace aqlock
