#ifndef MAR_TIMESERIES_HPP
#define MAR_TIMESERIES_HPP

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mar {

/// Calendar date (proleptic Gregorian), serialized as ISO 8601 YYYY-MM-DD.
struct Date {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    auto operator<=>(const Date&) const = default;

    /// Days since 1970-01-01 (negative before).
    std::int64_t serial() const;

    /// Calendar month addition; the day is clamped to the target month's length.
    Date add_months(int n) const;

    std::string to_string() const;
    static Date parse(const std::string& iso);
    static int days_in_month(int year, int month);
    static bool is_leap(int year);
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Strictly date-ordered series of real observations. All loaders and
/// transforms maintain: timestamps strictly increasing, values finite.
struct TimeSeries {
    std::vector<Date> timestamps;
    std::vector<double> values;
    std::string label;

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }

    /// Throws ValidationError unless the invariants hold.
    void validate() const;
};

struct SummaryStats {
    std::size_t n = 0;
    double mean = 0;
    double min = 0;
    double max = 0;
    double sd = 0;
    // NaN when undefined (zero variance); see summary().
    double skewness = 0;
    double excess_kurtosis = 0;
};

/// Reads a CSV with a header row. Lines starting with '#' are ignored, so
/// files may carry a leading "# manifest: ..." reference. Rows are sorted
/// by date; malformed rows raise ParseError with the 1-based line number,
/// duplicate dates raise ValidationError.
TimeSeries load_csv(const std::string& path, const std::string& date_col = "date",
                    const std::string& value_col = "value");

/// Writes "date,value" rows; values use 17 significant digits so that a
/// load/save round trip is exact. manifest_ref, when nonempty, is emitted
/// as a leading "# manifest: ..." comment.
void save_csv(const TimeSeries& ts, const std::string& path, const std::string& manifest_ref = "");

/// One observation per calendar month: the value on the last available day
/// of that month (timestamps keep the actual observation day). Idempotent.
/// A calendar month inside the span with no observations raises
/// ValidationError naming the month.
TimeSeries resample_monthly_last(const TimeSeries& ts);

/// Rolling unbiased sample variance over `window` observations; output entry
/// i covers input observations [i, i+window-1] and is stamped with the
/// window's last date. Output length = n - window + 1.
TimeSeries rolling_variance(const TimeSeries& ts, int window = 5);

/// Moment summary. sd uses the unbiased (n-1) variance; skewness and excess
/// kurtosis are the Pearson moment ratios on 1/n central moments,
/// g1 = m3/m2^(3/2) and g2 = m4/m2^2 - 3. For a zero-variance series both
/// ratios are reported as NaN.
SummaryStats summary(const TimeSeries& ts);

}  // namespace mar

#endif
