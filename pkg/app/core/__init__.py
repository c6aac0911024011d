# Core utilities and configuration