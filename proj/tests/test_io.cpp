#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include <sparserec/ensembles.hpp>
#include <sparserec/io.hpp>

using namespace sparserec;

TEST(Io, MatrixRoundTripIsExact) {
    const DenseMatrix A = sample_matrix({EnsembleKind::gaussian, 6.0, 5, 7, 9});
    std::stringstream ss;
    io::write_matrix(ss, A);
    EXPECT_EQ(io::read_matrix(ss), A);
}

TEST(Io, VectorRoundTripIsExact) {
    const DenseVector x{0.1, -1e-300, 1.0 / 3.0, 12345.678901234567};
    std::stringstream ss;
    io::write_vector(ss, x);
    EXPECT_EQ(io::read_vector(ss), x);
}

TEST(Io, HeaderFormat) {
    std::stringstream ss;
    io::write_matrix(ss, DenseMatrix(2, 3, 1.5));
    std::string first;
    std::getline(ss, first);
    EXPECT_EQ(first, "2 3");
}

TEST(Io, RejectsMalformedInput) {
    std::stringstream truncated("2 2\n1 2 3\n");
    EXPECT_THROW(io::read_matrix(truncated), InvalidArgument);
    std::stringstream trailing("2\n1 2 3\n");
    EXPECT_THROW(io::read_vector(trailing), InvalidArgument);
    std::stringstream bad_header("x\n");
    EXPECT_THROW(io::read_vector(bad_header), InvalidArgument);
    std::stringstream nonfinite("1\nnan\n");
    EXPECT_THROW(io::read_vector(nonfinite), InvalidArgument);
}

TEST(Io, FileRoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "sparserec_io_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "v.txt").string();
    io::save_vector(path, DenseVector{1, 2, 3});
    EXPECT_EQ(io::load_vector(path), (DenseVector{1, 2, 3}));
    EXPECT_THROW(io::load_vector((dir / "missing.txt").string()), InvalidArgument);
}
