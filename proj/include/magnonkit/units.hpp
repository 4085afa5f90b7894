#pragma once

#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace magnonkit {

inline constexpr double kHbar = 1.054571817e-34;  // J s
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Linear frequency in MHz -> angular frequency in rad/s.
inline double mhz_to_rad_s(double f_mhz) { return kTwoPi * f_mhz * 1e6; }
inline double rad_s_to_mhz(double w) { return w / (kTwoPi * 1e6); }

// Parses "9.2 aW", "3.1fW", "1e-15 W" etc. into watts.
inline double parse_power(const std::string& text)
{
    std::size_t pos = 0;
    double value = std::stod(text, &pos);
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    const std::string unit = text.substr(pos);
    if (unit == "W") return value;
    if (unit == "mW") return value * 1e-3;
    if (unit == "uW") return value * 1e-6;
    if (unit == "nW") return value * 1e-9;
    if (unit == "pW") return value * 1e-12;
    if (unit == "fW") return value * 1e-15;
    if (unit == "aW") return value * 1e-18;
    throw std::invalid_argument("parse_power: unknown power unit '" + unit + "'");
}

// Parses "8414.5 MHz" / "10.44916 GHz" / "250 kHz" into MHz.
inline double parse_freq_mhz(const std::string& text)
{
    std::size_t pos = 0;
    double value = std::stod(text, &pos);
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    const std::string unit = text.substr(pos);
    if (unit == "MHz") return value;
    if (unit == "GHz") return value * 1e3;
    if (unit == "kHz") return value * 1e-3;
    if (unit == "Hz") return value * 1e-6;
    throw std::invalid_argument("parse_freq_mhz: unknown frequency unit '" + unit + "'");
}

// Parses "0.62 us" / "630 ns" / "1.2 ms" into microseconds.
inline double parse_time_us(const std::string& text)
{
    std::size_t pos = 0;
    double value = std::stod(text, &pos);
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    const std::string unit = text.substr(pos);
    if (unit == "us") return value;
    if (unit == "ns") return value * 1e-3;
    if (unit == "ms") return value * 1e3;
    if (unit == "s") return value * 1e6;
    throw std::invalid_argument("parse_time_us: unknown time unit '" + unit + "'");
}

}  // namespace magnonkit
