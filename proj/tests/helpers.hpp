#ifndef TEQ_TEST_HELPERS_HPP
#define TEQ_TEST_HELPERS_HPP

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace testutil {

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        std::mt19937_64 rng(std::random_device{}());
        path_ = base / ("teq_test_" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p);
    out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

// A small working feed: two routes, three trips, weekday service.
inline void write_minimal_feed(const std::filesystem::path& dir) {
    write_file(dir / "stops.txt",
               "stop_id,stop_name,stop_lat,stop_lon\n"
               "A,Alpha,45.000,7.600\n"
               "B,Beta,45.010,7.600\n"
               "C,Gamma,45.020,7.600\n");
    write_file(dir / "routes.txt",
               "route_id,route_short_name,route_long_name,route_type\n"
               "R1,1,Mainline,3\n"
               "R2,2,Crossline,0\n");
    write_file(dir / "trips.txt",
               "route_id,service_id,trip_id\n"
               "R1,WD,T1\n"
               "R1,WD,T2\n"
               "R2,WE,T3\n");
    write_file(dir / "stop_times.txt",
               "trip_id,arrival_time,departure_time,stop_id,stop_sequence\n"
               "T1,08:00:00,08:00:00,A,1\n"
               "T1,08:10:00,08:10:00,B,2\n"
               "T1,08:20:00,08:20:00,C,3\n"
               "T2,09:00:00,09:01:00,A,1\n"
               "T2,09:11:00,09:11:00,B,2\n"
               "T3,08:05:00,08:05:00,B,1\n"
               "T3,08:12:00,08:12:00,C,2\n");
    write_file(dir / "calendar.txt",
               "service_id,monday,tuesday,wednesday,thursday,friday,saturday,sunday,"
               "start_date,end_date\n"
               "WD,1,1,1,1,1,0,0,20240101,20241231\n"
               "WE,0,0,0,0,0,1,1,20240101,20241231\n");
}

} // namespace testutil

#endif
