#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "errors.hpp"

namespace lbvc {

// Adaptive binary range coder (LZMA-style carry handling, 11-bit probabilities).

inline constexpr int kProbBits = 11;
inline constexpr std::uint16_t kProbInit = 1u << (kProbBits - 1);
inline constexpr int kMoveBits = 5;
inline constexpr std::uint32_t kTopValue = 1u << 24;

// Probability that the next bit is 0, scaled to 2^kProbBits.
struct BitModel
{
    std::uint16_t prob = kProbInit;

    void update(int bit) noexcept
    {
        if (bit == 0) {
            prob = static_cast<std::uint16_t>(prob + (((1u << kProbBits) - prob) >> kMoveBits));
        } else {
            prob = static_cast<std::uint16_t>(prob - (prob >> kMoveBits));
        }
    }
};

class RangeEncoder
{
public:
    void encode(BitModel& m, int bit)
    {
        const std::uint32_t bound = (range_ >> kProbBits) * m.prob;
        if (bit == 0) {
            range_ = bound;
        } else {
            low_ += bound;
            range_ -= bound;
        }
        m.update(bit);
        normalize();
    }

    // Equiprobable bit without a model.
    void encode_direct(int bit)
    {
        range_ >>= 1;
        if (bit != 0) {
            low_ += range_;
        }
        normalize();
    }

    std::vector<std::uint8_t> finish()
    {
        for (int i = 0; i < 5; ++i) {
            shift_low();
        }
        return std::move(out_);
    }

private:
    void normalize()
    {
        while (range_ < kTopValue) {
            range_ <<= 8;
            shift_low();
        }
    }

    void shift_low()
    {
        if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
            const auto carry = static_cast<std::uint8_t>(low_ >> 32);
            std::uint8_t temp = cache_;
            do {
                out_.push_back(static_cast<std::uint8_t>(temp + carry));
                temp = 0xFF;
            } while (--cache_size_ != 0);
            cache_ = static_cast<std::uint8_t>(static_cast<std::uint32_t>(low_) >> 24);
        }
        ++cache_size_;
        low_ = static_cast<std::uint64_t>(static_cast<std::uint32_t>(low_) << 8);
    }

    std::uint64_t low_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    std::uint8_t cache_ = 0;
    std::uint64_t cache_size_ = 1;
    std::vector<std::uint8_t> out_;
};

class RangeDecoder
{
public:
    explicit RangeDecoder(std::span<const std::uint8_t> data) : data_(data)
    {
        if (data_.size() < 5) {
            throw DecodeError("range-coded payload shorter than its 5-byte preamble");
        }
        if (data_[0] != 0) {
            throw DecodeError("range coder: invalid leading byte");
        }
        for (int i = 0; i < 5; ++i) {
            code_ = (code_ << 8) | next_byte();
        }
        check_state();
    }

    int decode(BitModel& m)
    {
        const std::uint32_t bound = (range_ >> kProbBits) * m.prob;
        int bit;
        if (code_ < bound) {
            range_ = bound;
            bit = 0;
        } else {
            code_ -= bound;
            range_ -= bound;
            bit = 1;
        }
        m.update(bit);
        normalize();
        return bit;
    }

    int decode_direct()
    {
        range_ >>= 1;
        int bit = 0;
        if (code_ >= range_) {
            code_ -= range_;
            bit = 1;
        }
        normalize();
        return bit;
    }

    // A cleanly terminated stream is fully consumed and leaves a zero code register.
    void finish() const
    {
        if (pos_ != data_.size() || code_ != 0) {
            throw DecodeError("range coder: trailing or inconsistent payload data");
        }
    }

private:
    std::uint32_t next_byte()
    {
        if (pos_ >= data_.size()) {
            throw DecodeError("range coder: payload truncated");
        }
        return data_[pos_++];
    }

    void normalize()
    {
        while (range_ < kTopValue) {
            range_ <<= 8;
            code_ = (code_ << 8) | next_byte();
        }
        check_state();
    }

    void check_state() const
    {
        if (code_ >= range_) {
            throw DecodeError("range coder: state violation (code >= range)");
        }
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    std::uint32_t code_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
};

} // namespace lbvc
