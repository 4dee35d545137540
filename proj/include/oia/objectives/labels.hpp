#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace oia {

inline constexpr std::size_t kNumActions = 4;
inline constexpr std::size_t kNumExplanations = 21;

// Action order: move forward, stop/slow down, turn/change lane left,
// turn/change lane right.
enum class Action : std::size_t { Forward = 0, Stop = 1, Left = 2, Right = 3 };

inline constexpr std::array<std::string_view, kNumActions> kActionNames = {"F", "S", "L", "R"};

inline constexpr std::array<std::string_view, kNumExplanations> kExplanationNames = {
    "traffic_light_green",   "follow_traffic",        "road_clear",
    "traffic_light",         "traffic_sign",          "obstacle_car",
    "obstacle_person",       "obstacle_rider",        "obstacle_others",
    "no_lane_left",          "obstacles_left_lane",   "solid_line_left",
    "on_left_turn_lane",     "left_light_allows",     "front_car_turning_left",
    "no_lane_right",         "obstacles_right_lane",  "solid_line_right",
    "on_right_turn_lane",    "right_light_allows",    "front_car_turning_right",
};

// Fixed-arity vector of {0,1} flags.
template <std::size_t N>
class BinaryLabel {
public:
    static constexpr std::size_t size() { return N; }

    BinaryLabel() { bits_.fill(0); }

    static BinaryLabel from_span(std::span<const int> flags) {
        if (flags.size() != N) {
            throw std::invalid_argument("label needs " + std::to_string(N) + " flags, got " +
                                        std::to_string(flags.size()));
        }
        BinaryLabel l;
        for (std::size_t i = 0; i < N; ++i) l.set(i, flags[i]);
        return l;
    }

    // Parses a mask of '0'/'1' characters.
    static BinaryLabel from_mask(std::string_view mask) {
        if (mask.size() != N) {
            throw std::invalid_argument("mask must have " + std::to_string(N) + " characters, got " +
                                        std::to_string(mask.size()));
        }
        BinaryLabel l;
        for (std::size_t i = 0; i < N; ++i) {
            if (mask[i] != '0' && mask[i] != '1') {
                throw std::invalid_argument(std::string("mask character '") + mask[i] + "' at position " +
                                            std::to_string(i) + " is not 0 or 1");
            }
            l.bits_[i] = mask[i] - '0';
        }
        return l;
    }

    std::string mask() const {
        std::string s(N, '0');
        for (std::size_t i = 0; i < N; ++i) s[i] = static_cast<char>('0' + bits_[i]);
        return s;
    }

    int operator[](std::size_t i) const { return bits_[i]; }
    void set(std::size_t i, int v) {
        if (v != 0 && v != 1) {
            throw std::invalid_argument("label flag " + std::to_string(i) + " is " + std::to_string(v) +
                                        ", expected 0 or 1");
        }
        bits_[i] = v;
    }

    std::span<const int> flags() const { return bits_; }
    std::size_t count() const {
        std::size_t c = 0;
        for (int b : bits_) c += static_cast<std::size_t>(b);
        return c;
    }

    bool operator==(const BinaryLabel&) const = default;

private:
    std::array<int, N> bits_;
};

using ActionLabel = BinaryLabel<kNumActions>;
using ExplanationLabel = BinaryLabel<kNumExplanations>;

}  // namespace oia
