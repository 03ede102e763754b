#![no_main]

use libfuzzer_sys::fuzz_target;
use productset::certificate::CertificateNode;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cert) = CertificateNode::from_json_str(text) {
        let again = CertificateNode::from_json_str(&cert.to_json_string()).expect("serialized trees parse");
        assert_eq!(again, cert);
    }
});
