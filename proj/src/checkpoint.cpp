#include "nsplab/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace nsplab {

namespace {

struct Writer {
    std::vector<unsigned char> buf;
    template <class T>
    void put(const T& v) {
        const auto* p = reinterpret_cast<const unsigned char*>(&v);
        buf.insert(buf.end(), p, p + sizeof(T));
    }
    void field(const SpectralField& f) {
        put<std::int32_t>(f.ncomp);
        put<std::uint64_t>(f.coeffs.size());
        const auto* p = reinterpret_cast<const unsigned char*>(f.coeffs.data());
        buf.insert(buf.end(), p, p + f.coeffs.size() * sizeof(cplx));
    }
};

struct Reader {
    const std::vector<unsigned char>& buf;
    std::size_t pos = 0;
    template <class T>
    T get() {
        if (pos + sizeof(T) > buf.size()) throw std::runtime_error("checkpoint: truncated");
        T v;
        std::memcpy(&v, buf.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }
    SpectralField field(const Grid& g) {
        int nc = get<std::int32_t>();
        auto count = get<std::uint64_t>();
        if (nc < 1 || nc > 3 || count != static_cast<std::uint64_t>(nc) * g.size())
            throw std::runtime_error("checkpoint: field size does not match the grid");
        SpectralField f(g, nc);
        std::size_t bytes = count * sizeof(cplx);
        if (pos + bytes > buf.size()) throw std::runtime_error("checkpoint: truncated");
        std::memcpy(f.coeffs.data(), buf.data() + pos, bytes);
        pos += bytes;
        return f;
    }
};

}  // namespace

std::vector<unsigned char> encode_checkpoint(const std::vector<FluidState>& states) {
    Writer w;
    for (char c : kCheckpointMagic) w.put(c);
    w.put(kCheckpointVersion);
    w.put<std::uint64_t>(states.size());
    for (const auto& s : states) {
        w.put<std::int32_t>(s.grid.dim);
        w.put<std::int32_t>(s.grid.n);
        w.put(s.grid.box_length);
        w.put(s.grid.dealias_fraction);
        w.put<std::int32_t>(s.variant == Variant::ion ? 1 : 0);
        w.put(s.epsilon);
        w.put(s.time);
        w.field(s.rho);
        w.field(s.u);
    }
    return w.buf;
}

std::vector<FluidState> decode_checkpoint(const std::vector<unsigned char>& bytes) {
    Reader r{bytes};
    for (char c : kCheckpointMagic)
        if (r.get<char>() != c) throw std::runtime_error("checkpoint: bad magic");
    auto ver = r.get<std::uint32_t>();
    if (ver != kCheckpointVersion) throw std::runtime_error("checkpoint: unsupported version " + std::to_string(ver));
    auto count = r.get<std::uint64_t>();
    std::vector<FluidState> out;
    for (std::uint64_t k = 0; k < count; ++k) {
        int dim = r.get<std::int32_t>(), n = r.get<std::int32_t>();
        double L = r.get<double>(), frac = r.get<double>();
        Grid g = make_grid(dim, n, L, frac);
        Variant v = r.get<std::int32_t>() == 1 ? Variant::ion : Variant::electron;
        double eps = r.get<double>();
        FluidState s(g, v, eps);
        s.time = r.get<double>();
        s.rho = r.field(g);
        s.u = r.field(g);
        out.push_back(std::move(s));
    }
    if (r.pos != bytes.size()) throw std::runtime_error("checkpoint: trailing bytes");
    return out;
}

void save_checkpoint(const std::string& path, const std::vector<FluidState>& states) {
    auto bytes = encode_checkpoint(states);
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("checkpoint: cannot open " + tmp);
        os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!os) throw std::runtime_error("checkpoint: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::vector<FluidState> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

bool bit_equal(const FluidState& a, const FluidState& b) {
    auto same = [](const SpectralField& x, const SpectralField& y) {
        return x.ncomp == y.ncomp && x.coeffs.size() == y.coeffs.size() &&
               std::memcmp(x.coeffs.data(), y.coeffs.data(), x.coeffs.size() * sizeof(cplx)) == 0;
    };
    auto bits = [](double x, double y) { return std::memcmp(&x, &y, sizeof(double)) == 0; };
    return a.grid == b.grid && a.variant == b.variant && bits(a.epsilon, b.epsilon) && bits(a.time, b.time) &&
           same(a.rho, b.rho) && same(a.u, b.u);
}

}  // namespace nsplab
