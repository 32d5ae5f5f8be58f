#ifndef GPS_RECORD_HPP
#define GPS_RECORD_HPP

#include <string>

#include "gps/estimation.hpp"
#include "gps/gof.hpp"

namespace gps {

enum class RecordFormat { json, csv };

/// Flat key/value record of a fit (estimates, standard errors, log-likelihood,
/// iteration count, diagnostics) plus, optionally, the goodness-of-fit block.
std::string fit_record(const FitResult& fit, const GofReport* gof, RecordFormat format);

}  // namespace gps

#endif
