#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tsc {

// All quantities are SI internally: meters, seconds, m/s.
namespace units {
inline constexpr double kStoppedSpeed = 0.1 / 3.6;  // 0.1 km/h once, in m/s
inline constexpr double kQueueSensorRange = 50.0;   // m upstream of the stop line
inline constexpr double kYellowDuration = 5.0;      // s
inline constexpr double kMinGreenTime = 5.0;        // s between phase switches
}  // namespace units

// Input rejected because a structural invariant does not hold.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed text input; message carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    int line() const { return line_; }

private:
    int line_ = 0;
};

// Shortest decimal form that round-trips through a double.
std::string format_double(double v);

}  // namespace tsc
