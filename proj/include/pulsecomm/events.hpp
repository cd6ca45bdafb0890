// events.hpp
//  Pulse events, FPGA<->HICANN pulse packets and the playback memory frame
//  format.
//
//  Pulse payload (3 octets, big endian): label9 in bits 23..15, timestamp in
//  bits 14..0. Packets are [header][payload...][crc8], header 0x01 for a
//  single and 0x02 for a double pulse packet; CRC-8 uses polynomial 0x07,
//  initial value 0x00, no reflection, computed over header and payload.
//
//  Playback words (32 bit) carry a 3-bit type tag in bits 31..29:
//      000  frame header
//      001  group start, bits 28..0 = FPGA release tick
//      010  pulse, bits 28..15 = label14, bits 14..0 = ts15
//      011  trace record (same payload layout as a pulse word)
//      100  trace overflow marker, bits 28..0 = overflow epoch
//  label14 = hicann3 << 11 | label9 << 2; the low two bits are reserved.
#ifndef PULSECOMM_EVENTS_HPP
#define PULSECOMM_EVENTS_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pulsecomm/timebase.hpp"

namespace pulsecomm
{

inline constexpr int hicanns_per_fpga = 8;
inline constexpr std::uint16_t label9_limit = 512;
inline constexpr std::size_t max_group_pulses = 184;
inline constexpr std::int64_t playback_capacity_pulses = 125'000'000;
inline constexpr std::int64_t memory_bytes_per_direction =
        std::int64_t{512} * 1024 * 1024;

struct PulseEvent
{
    std::uint8_t hicann{0};
    std::uint16_t label9{0};
    HicannTimestamp ts{};

    [[nodiscard]] constexpr std::uint8_t channel3() const
    {
        return static_cast<std::uint8_t>(label9 >> 6);
    }
    [[nodiscard]] constexpr std::uint8_t neuron6() const
    {
        return static_cast<std::uint8_t>(label9 & 63U);
    }
    constexpr bool operator==(const PulseEvent &) const = default;
};

// Checked construction; throws DomainError on out-of-range fields
PulseEvent make_pulse(int hicann, int label9, int ts15 = 0);

enum class PacketKind : std::uint8_t
{
    single = 0x01,
    double_pulse = 0x02,
};

struct PulsePacket
{
    PacketKind kind{PacketKind::single};
    std::array<PulseEvent, 2> pulses{};

    [[nodiscard]] std::size_t pulse_count() const
    {
        return kind == PacketKind::single ? 1 : 2;
    }
    bool operator==(const PulsePacket &other) const;
};

inline constexpr std::size_t single_packet_chunks = 5;
inline constexpr std::size_t double_packet_chunks = 8;
inline constexpr std::size_t idle_chunks = 2;
inline constexpr std::int64_t chunk_ns = 8; // 8 bit at 1 Gbit/s

std::array<std::uint8_t, 3> encode_pulse(const PulseEvent &pulse);
PulseEvent decode_pulse(std::span<const std::uint8_t, 3> octets,
        std::uint8_t hicann = 0);

std::uint8_t crc8(std::span<const std::uint8_t> data);

std::vector<std::uint8_t> encode_packet(const PulsePacket &packet);
// Decodes the packet at the front of `octets`; `consumed` receives its size
PulsePacket decode_packet(std::span<const std::uint8_t> octets,
        std::size_t &consumed, std::uint8_t hicann = 0);

// Link occupancy of one packet including the two idle chunks
TimePoint packet_occupancy(PacketKind kind);

std::vector<std::uint8_t> encode_packet_stream(
        std::span<const PulsePacket> packets);
std::vector<PulsePacket> decode_packet_stream(
        std::span<const std::uint8_t> octets, std::uint8_t hicann = 0);

// --- playback memory ---------------------------------------------------

enum class WordTag : std::uint32_t
{
    header = 0b000,
    group_start = 0b001,
    pulse = 0b010,
    trace_record = 0b011,
    overflow_marker = 0b100,
};

inline constexpr std::uint32_t payload_mask = (1U << 29) - 1;
inline constexpr std::uint32_t playback_frame_type = 0x0000'5042;

constexpr std::uint32_t make_word(WordTag tag, std::uint32_t payload)
{
    return (static_cast<std::uint32_t>(tag) << 29) | (payload & payload_mask);
}
constexpr WordTag word_tag(std::uint32_t word)
{
    return static_cast<WordTag>(word >> 29);
}

std::uint16_t make_label14(std::uint8_t hicann, std::uint16_t label9);
constexpr std::uint8_t label14_hicann(std::uint16_t label14)
{
    return static_cast<std::uint8_t>((label14 >> 11) & 7U);
}
constexpr std::uint16_t label14_label9(std::uint16_t label14)
{
    return static_cast<std::uint16_t>((label14 >> 2) & 511U);
}

struct PlaybackPulse
{
    std::uint16_t label14{0};
    std::uint16_t ts15{0};

    bool operator==(const PlaybackPulse &) const = default;
};

struct PulseGroup
{
    FpgaTick release{};
    std::vector<PlaybackPulse> pulses;

    bool operator==(const PulseGroup &) const = default;
};

struct PlaybackFrame
{
    std::uint32_t header_word{make_word(WordTag::header, playback_frame_type)};
    std::vector<PulseGroup> groups;

    [[nodiscard]] std::size_t pulse_count() const;
    bool operator==(const PlaybackFrame &) const = default;
};

// The preloaded stimulus memory content is a single frame
using PlaybackImage = PlaybackFrame;

std::vector<std::uint32_t> encode_playback_frame(const PlaybackFrame &frame);
PlaybackFrame decode_playback_frame(std::span<const std::uint32_t> words);

struct MemoryUsage
{
    std::int64_t pulses{0};
    std::int64_t bytes{0};
};

// Bytes needed for `n_pulses` spread over `n_groups` groups plus the header;
// throws CapacityError above 125 M pulses or 512 MiB
MemoryUsage memory_budget(std::int64_t n_pulses, std::int64_t n_groups);
// Same, assuming full 184-pulse groups
MemoryUsage memory_budget(std::int64_t n_pulses);

void write_words_le(
        const std::filesystem::path &path, std::span<const std::uint32_t> words);
std::vector<std::uint32_t> read_words_le(const std::filesystem::path &path);
void write_octets(const std::filesystem::path &path,
        std::span<const std::uint8_t> octets);
std::vector<std::uint8_t> read_octets(const std::filesystem::path &path);

} // namespace pulsecomm

#endif
