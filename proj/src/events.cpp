// events.cpp
#include <fstream>
#include <string>

#include "pulsecomm/errors.hpp"
#include "pulsecomm/events.hpp"

namespace
{

constexpr std::array<std::uint8_t, 256> make_crc_table()
{
    std::array<std::uint8_t, 256> table{};
    for (unsigned i = 0; i < 256; ++i)
    {
        unsigned crc = i;
        for (int bit = 0; bit < 8; ++bit)
        {
            crc = (crc & 0x80U) ? ((crc << 1) ^ 0x07U) : (crc << 1);
        }
        table[i] = static_cast<std::uint8_t>(crc & 0xFFU);
    }
    return table;
}

constexpr auto crc_table = make_crc_table();

} // namespace

pulsecomm::PulseEvent pulsecomm::make_pulse(
        const int hicann, const int label9, const int ts15)
{
    if (hicann < 0 || hicann >= hicanns_per_fpga)
    {
        throw DomainError("hicann index out of range: " + std::to_string(hicann));
    }
    if (label9 < 0 || label9 >= label9_limit)
    {
        throw DomainError("label9 out of range: " + std::to_string(label9));
    }
    if (ts15 < 0 || ts15 >= timestamp_modulus)
    {
        throw DomainError("timestamp out of range: " + std::to_string(ts15));
    }
    return PulseEvent{static_cast<std::uint8_t>(hicann),
            static_cast<std::uint16_t>(label9),
            HicannTimestamp{static_cast<std::uint16_t>(ts15)}};
}

bool pulsecomm::PulsePacket::operator==(const PulsePacket &other) const
{
    if (kind != other.kind)
    {
        return false;
    }
    for (std::size_t i = 0; i < pulse_count(); ++i)
    {
        if (!(pulses[i] == other.pulses[i]))
        {
            return false;
        }
    }
    return true;
}

std::array<std::uint8_t, 3> pulsecomm::encode_pulse(const PulseEvent &pulse)
{
    const std::uint32_t v = (std::uint32_t{pulse.label9} << 15) |
            (std::uint32_t{pulse.ts.ticks15} & 0x7FFFU);
    return {static_cast<std::uint8_t>(v >> 16),
            static_cast<std::uint8_t>((v >> 8) & 0xFFU),
            static_cast<std::uint8_t>(v & 0xFFU)};
}

pulsecomm::PulseEvent pulsecomm::decode_pulse(
        std::span<const std::uint8_t, 3> octets, const std::uint8_t hicann)
{
    const std::uint32_t v = (std::uint32_t{octets[0]} << 16) |
            (std::uint32_t{octets[1]} << 8) | std::uint32_t{octets[2]};
    return PulseEvent{hicann, static_cast<std::uint16_t>(v >> 15),
            HicannTimestamp{static_cast<std::uint16_t>(v & 0x7FFFU)}};
}

std::uint8_t pulsecomm::crc8(std::span<const std::uint8_t> data)
{
    std::uint8_t crc = 0;
    for (const std::uint8_t byte : data)
    {
        crc = crc_table[crc ^ byte];
    }
    return crc;
}

std::vector<std::uint8_t> pulsecomm::encode_packet(const PulsePacket &packet)
{
    std::vector<std::uint8_t> out;
    out.reserve(double_packet_chunks);
    out.push_back(static_cast<std::uint8_t>(packet.kind));
    for (std::size_t i = 0; i < packet.pulse_count(); ++i)
    {
        const auto octets = encode_pulse(packet.pulses[i]);
        out.insert(out.end(), octets.begin(), octets.end());
    }
    out.push_back(crc8(out));
    return out;
}

pulsecomm::PulsePacket pulsecomm::decode_packet(
        std::span<const std::uint8_t> octets, std::size_t &consumed,
        const std::uint8_t hicann)
{
    if (octets.empty())
    {
        throw FormatError("decode_packet: empty input", 0);
    }
    PulsePacket packet;
    std::size_t size = 0;
    if (octets[0] == static_cast<std::uint8_t>(PacketKind::single))
    {
        packet.kind = PacketKind::single;
        size = single_packet_chunks;
    }
    else if (octets[0] == static_cast<std::uint8_t>(PacketKind::double_pulse))
    {
        packet.kind = PacketKind::double_pulse;
        size = double_packet_chunks;
    }
    else
    {
        throw FormatError("decode_packet: unknown header byte " +
                        std::to_string(octets[0]),
                0);
    }
    if (octets.size() < size)
    {
        throw FormatError("decode_packet: truncated packet", octets.size());
    }
    if (crc8(octets.first(size - 1)) != octets[size - 1])
    {
        throw FormatError("decode_packet: CRC mismatch", size - 1);
    }
    for (std::size_t i = 0; i < packet.pulse_count(); ++i)
    {
        packet.pulses[i] = decode_pulse(
                octets.subspan(1 + 3 * i).first<3>(), hicann);
    }
    consumed = size;
    return packet;
}

pulsecomm::TimePoint pulsecomm::packet_occupancy(const PacketKind kind)
{
    const std::size_t chunks = (kind == PacketKind::single) ?
            single_packet_chunks :
            double_packet_chunks;
    return TimePoint{std::int64_t(chunks + idle_chunks) * chunk_ns};
}

std::vector<std::uint8_t> pulsecomm::encode_packet_stream(
        std::span<const PulsePacket> packets)
{
    std::vector<std::uint8_t> out;
    for (const PulsePacket &p : packets)
    {
        const auto bytes = encode_packet(p);
        out.insert(out.end(), bytes.begin(), bytes.end());
    }
    return out;
}

std::vector<pulsecomm::PulsePacket> pulsecomm::decode_packet_stream(
        std::span<const std::uint8_t> octets, const std::uint8_t hicann)
{
    std::vector<PulsePacket> out;
    std::size_t pos = 0;
    while (pos < octets.size())
    {
        std::size_t consumed = 0;
        try
        {
            out.push_back(decode_packet(octets.subspan(pos), consumed, hicann));
        }
        catch (const FormatError &e)
        {
            throw FormatError(e.what(), pos + e.offset());
        }
        pos += consumed;
    }
    return out;
}

std::uint16_t pulsecomm::make_label14(
        const std::uint8_t hicann, const std::uint16_t label9)
{
    if (hicann >= hicanns_per_fpga || label9 >= label9_limit)
    {
        throw DomainError("make_label14: hicann or label out of range");
    }
    return static_cast<std::uint16_t>((unsigned{hicann} << 11) |
            (unsigned{label9} << 2));
}

std::size_t pulsecomm::PlaybackFrame::pulse_count() const
{
    std::size_t n = 0;
    for (const PulseGroup &g : groups)
    {
        n += g.pulses.size();
    }
    return n;
}

std::vector<std::uint32_t> pulsecomm::encode_playback_frame(
        const PlaybackFrame &frame)
{
    if (word_tag(frame.header_word) != WordTag::header)
    {
        throw FormatError("encode_playback_frame: header tag must be 000", 0);
    }
    std::vector<std::uint32_t> words;
    words.reserve(1 + frame.groups.size() + frame.pulse_count());
    words.push_back(frame.header_word);
    std::int64_t last_release = -1;
    for (const PulseGroup &g : frame.groups)
    {
        const std::size_t offset = words.size();
        if (g.pulses.empty())
        {
            throw FormatError("encode_playback_frame: empty pulse group", offset);
        }
        if (g.pulses.size() > max_group_pulses)
        {
            throw FormatError("encode_playback_frame: group holds " +
                            std::to_string(g.pulses.size()) +
                            " pulses, limit is 184",
                    offset);
        }
        if (g.release.ticks8 <= last_release ||
                g.release.ticks8 > std::int64_t{payload_mask})
        {
            throw FormatError("encode_playback_frame: release ticks must "
                              "increase and fit 29 bits",
                    offset);
        }
        last_release = g.release.ticks8;
        words.push_back(make_word(WordTag::group_start,
                static_cast<std::uint32_t>(g.release.ticks8)));
        for (const PlaybackPulse &p : g.pulses)
        {
            const std::uint32_t label = p.label14 & 0x3FFCU;
            words.push_back(make_word(
                    WordTag::pulse, (label << 15) | (p.ts15 & 0x7FFFU)));
        }
    }
    return words;
}

pulsecomm::PlaybackFrame pulsecomm::decode_playback_frame(
        std::span<const std::uint32_t> words)
{
    if (words.empty() || word_tag(words[0]) != WordTag::header)
    {
        throw FormatError("decode_playback_frame: missing frame header", 0);
    }
    PlaybackFrame frame;
    frame.header_word = words[0];
    std::int64_t last_release = -1;
    for (std::size_t i = 1; i < words.size(); ++i)
    {
        const std::uint32_t w = words[i];
        switch (word_tag(w))
        {
        case WordTag::group_start:
        {
            if (!frame.groups.empty() && frame.groups.back().pulses.empty())
            {
                throw FormatError("decode_playback_frame: empty pulse group", i);
            }
            const std::int64_t release = w & payload_mask;
            if (release <= last_release)
            {
                throw FormatError("decode_playback_frame: release ticks do "
                                  "not increase",
                        i);
            }
            last_release = release;
            frame.groups.push_back(PulseGroup{FpgaTick{release}, {}});
            break;
        }
        case WordTag::pulse:
        {
            if (frame.groups.empty())
            {
                throw FormatError(
                        "decode_playback_frame: pulse before group start", i);
            }
            PulseGroup &g = frame.groups.back();
            if (g.pulses.size() >= max_group_pulses)
            {
                throw FormatError(
                        "decode_playback_frame: group exceeds 184 pulses", i);
            }
            const std::uint32_t payload = w & payload_mask;
            g.pulses.push_back(PlaybackPulse{
                    static_cast<std::uint16_t>((payload >> 15) & 0x3FFCU),
                    static_cast<std::uint16_t>(payload & 0x7FFFU)});
            break;
        }
        default:
            throw FormatError("decode_playback_frame: unexpected word tag " +
                            std::to_string(w >> 29),
                    i);
        }
    }
    if (!frame.groups.empty() && frame.groups.back().pulses.empty())
    {
        throw FormatError(
                "decode_playback_frame: empty pulse group", words.size());
    }
    return frame;
}

pulsecomm::MemoryUsage pulsecomm::memory_budget(
        const std::int64_t n_pulses, const std::int64_t n_groups)
{
    if (n_pulses < 0 || n_groups < 0)
    {
        throw DomainError("memory_budget: negative count");
    }
    if (n_pulses > playback_capacity_pulses)
    {
        throw CapacityError("memory holds at most 125000000 pulses, requested " +
                std::to_string(n_pulses));
    }
    const std::int64_t bytes = 4 * (n_pulses + n_groups + 1);
    if (bytes > memory_bytes_per_direction)
    {
        throw CapacityError("memory image of " + std::to_string(bytes) +
                " bytes exceeds 512 MiB");
    }
    return MemoryUsage{n_pulses, bytes};
}

pulsecomm::MemoryUsage pulsecomm::memory_budget(const std::int64_t n_pulses)
{
    if (n_pulses < 0)
    {
        throw DomainError("memory_budget: negative count");
    }
    const auto group = static_cast<std::int64_t>(max_group_pulses);
    return memory_budget(n_pulses, (n_pulses + group - 1) / group);
}

void pulsecomm::write_words_le(
        const std::filesystem::path &path, std::span<const std::uint32_t> words)
{
    std::vector<std::uint8_t> bytes;
    bytes.reserve(words.size() * 4);
    for (const std::uint32_t w : words)
    {
        for (int b = 0; b < 4; ++b)
        {
            bytes.push_back(static_cast<std::uint8_t>((w >> (8 * b)) & 0xFFU));
        }
    }
    write_octets(path, bytes);
}

std::vector<std::uint32_t> pulsecomm::read_words_le(
        const std::filesystem::path &path)
{
    const std::vector<std::uint8_t> bytes = read_octets(path);
    if (bytes.size() % 4 != 0)
    {
        throw FormatError(path.string() + ": size is not a multiple of 4 bytes",
                bytes.size());
    }
    std::vector<std::uint32_t> words(bytes.size() / 4);
    for (std::size_t i = 0; i < words.size(); ++i)
    {
        std::uint32_t w = 0;
        for (int b = 0; b < 4; ++b)
        {
            w |= std::uint32_t{bytes[4 * i + b]} << (8 * b);
        }
        words[i] = w;
    }
    return words;
}

void pulsecomm::write_octets(
        const std::filesystem::path &path, std::span<const std::uint8_t> octets)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    out.write(reinterpret_cast<const char *>(octets.data()),
            static_cast<std::streamsize>(octets.size()));
    if (!out)
    {
        throw std::runtime_error("write failed: " + path.string());
    }
}

std::vector<std::uint8_t> pulsecomm::read_octets(
        const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw std::runtime_error("cannot open for reading: " + path.string());
    }
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
            std::istreambuf_iterator<char>());
}
