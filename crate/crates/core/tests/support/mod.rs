pub mod oracle;
pub mod scripts;
pub mod strategies;
pub mod topology;
