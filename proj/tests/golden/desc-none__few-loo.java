File file = new File(path);
BufferedReader br = new BufferedReader(new FileReader(file));
String line = br.readLine().trim();
// the fully qualified name of "BufferedReader()" is "java.io.BufferedReader"
// the fully qualified name of "String" is "java.lang.String"
// the fully qualified name of "FileReader()" is "java.io.FileReader"
// the fully qualified name of "File()" is "java.io.File"
// the fully qualified name of "File" is "java.io.File"
// the fully qualified name of "BufferedReader" is "java.io.BufferedReader"
// the fully qualified name of "readLine()" is "java.io.BufferedReader.readLine()"
// the fully qualified name of "br" is