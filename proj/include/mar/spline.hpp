#ifndef MAR_SPLINE_HPP
#define MAR_SPLINE_HPP

#include "mar/timeseries.hpp"

namespace mar {

struct SplineDetrend {
    TimeSeries trend;     ///< fitted values, same timestamps as the input
    TimeSeries residual;  ///< observed minus fitted
    std::vector<Date> knots;
};

/// Least-squares natural cubic spline detrend.
///
/// Knots are anchored at the first timestamp and placed every
/// `knot_spacing_months` calendar months up to the last timestamp; one
/// phantom knot is added one spacing before the first and one after the
/// last, and the natural (zero second derivative) boundary condition holds
/// at those outermost knots. The phantom knots keep every data segment a
/// full cubic, so a cubic polynomial sample is reproduced exactly.
///
/// Requires: series spanning at least one knot interval, and
/// length >= (number of in-sample knots) + 4.
SplineDetrend spline_detrend(const TimeSeries& ts, int knot_spacing_months = 24);

}  // namespace mar

#endif
